//! Exercises the HTTP chat transport against a throwaway local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use pdd_core::llm::{HttpTransport, LlmClassifier, LlmError, TransportConfig};
use pdd_core::Dataset;

struct Captured {
    headers: Vec<String>,
    body: serde_json::Value,
}

/// Serves one canned response per entry in `replies`, reporting each request.
fn serve(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut headers = Vec::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end().to_string();
                if line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            tx.send(Captured {
                headers,
                body: serde_json::from_slice(&buf).unwrap(),
            })
            .unwrap();
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn completion(content: &str) -> String {
    serde_json::json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}).to_string()
}

fn dataset() -> Dataset {
    Dataset::from_columns(
        "Staff",
        "employee table",
        vec![
            ("email".into(), vec!["a@example.com".into(), "b@example.com".into()]),
            ("dept".into(), vec!["sales".into(), "ops".into()]),
        ],
    )
    .unwrap()
}

#[test]
fn sends_chat_request_and_parses_first_choice() {
    let (url, rx) = serve(vec![(200, completion("{'email': True}"))]);
    std::env::set_var("PDD_TEST_KEY_A", "sk-test");
    let cfg = TransportConfig {
        endpoint_url: url,
        model_id: "test-model".into(),
        api_key_env: "PDD_TEST_KEY_A".into(),
        seed: Some(7),
        max_retries: 0,
        ..Default::default()
    };
    let clf = LlmClassifier::new(Box::new(HttpTransport::new(cfg.clone())), cfg);
    let ds = dataset();
    let v = clf.classify_column_llm(&ds, &ds.columns[0]).unwrap();
    assert!(v.is_personal);

    let req = rx.recv().unwrap();
    assert!(req.headers.iter().any(|h| h == "authorization: Bearer sk-test" || h == "Authorization: Bearer sk-test"));
    assert_eq!(req.body["model"], "test-model");
    assert_eq!(req.body["seed"], 7);
    assert_eq!(req.body["temperature"], 0.0);
    let roles: Vec<&str> = req.body["messages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["role"].as_str().unwrap())
        .collect();
    assert_eq!(roles, ["system", "user", "assistant", "user"]);
    assert!(req.body["messages"][3]["content"].as_str().unwrap().contains("'email': ['a@example.com', 'b@example.com']"));
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, rx) = serve(vec![
        (503, "{}".into()),
        (200, completion("garbage")),
        (200, completion("{\"dept\": false}")),
    ]);
    let cfg = TransportConfig {
        endpoint_url: url,
        max_retries: 2,
        backoff_ms: 1,
        ..Default::default()
    };
    let clf = LlmClassifier::new(Box::new(HttpTransport::new(cfg.clone())), cfg);
    let ds = dataset();
    let v = clf.classify_column_llm(&ds, &ds.columns[1]).unwrap();
    assert!(!v.is_personal);
    assert_eq!(clf.request_count(), 3);
    assert_eq!(rx.iter().take(3).count(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, _rx) = serve(vec![(401, "{\"error\": \"bad key\"}".into())]);
    let cfg = TransportConfig {
        endpoint_url: url,
        max_retries: 3,
        backoff_ms: 1,
        ..Default::default()
    };
    let clf = LlmClassifier::new(Box::new(HttpTransport::new(cfg.clone())), cfg);
    let ds = dataset();
    match clf.classify_column_llm(&ds, &ds.columns[0]) {
        Err(LlmError::Transport(e)) => assert!(e.message.contains("401")),
        other => panic!("{other:?}"),
    }
    assert_eq!(clf.request_count(), 1);
}
