//! Prompt texts for context-aware column classification.
//!
//! The conversation has four parts: a system prompt stating role, task,
//! rationale and output format; a one-shot example question; its answer; and
//! the data prompt for the column under test.

use crate::corpus::{Column, Dataset, ValueSample};

use super::LlmError;

pub const INITIAL_PROMPT: &str = "As a classifier of person-related data in tabular datasets, your task is to analyze the provided columns (each containing up to ten distinct values) and determine whether they contain information that originates from or relates to a person, even if it is not directly identifiable.
Detecting person-related information helps ensure compliance with data protection regulations and safeguards individuals\u{2019} privacy and security.
Output your results in a dictionary format with a boolean indicating if the column contains person-related data or not.";

pub const EXAMPLE_PROMPT: &str = "You can use the following example as a guideline:
Classify the following column with careful consideration of the dataset description:
Dataset:
Title: 'Test Dataset'
Description: 'This dataset was used for a linear regression.'
Features: ['first_name_en_10', 'last_name_en_10', 'email_en_10', 'phone_number', 'address_en_10', 'city_en_10', 'country_en_10', 'date', 'target']
Column of the dataset to classify:
'first_name_en_10': ['Tom', 'Walter', 'Mia', 'Lena', 'John', 'Jack', 'Felice', 'Anna', 'Lukas', 'Will']
Does this column, in the context of the dataset, contain information relating to a natural person?";

pub const EXAMPLE_ANSWER: &str = "{'first_name_en_10': true}";

pub const CLOSING_QUESTION: &str =
    "Does this column, in the context of the dataset, contain information relating to a natural person?";

pub fn build_initial_prompt() -> &'static str {
    INITIAL_PROMPT
}

/// The one-shot example question and its answer.
pub fn build_example_pair() -> (&'static str, &'static str) {
    (EXAMPLE_PROMPT, EXAMPLE_ANSWER)
}

/// Renders `s` the way a Python `repr()` of a `str` would.
pub fn python_str_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                out.push_str(&format!("\\x{:02x}", c as u32))
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

/// Canonical integers and decimals are shown bare, like numbers in a Python
/// list; everything else is quoted.
fn render_value(v: &str) -> String {
    let body = v.strip_prefix('-').unwrap_or(v);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let int_ok = !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && (int == "0" || !int.starts_with('0'));
    let frac_ok = frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()));
    if int_ok && frac_ok {
        v.to_string()
    } else {
        python_str_repr(v)
    }
}

fn render_list(items: impl IntoIterator<Item = String>) -> String {
    let items: Vec<String> = items.into_iter().collect();
    format!("[{}]", items.join(", "))
}

/// `'name': [v1, ..., vk]`
pub fn render_column(name: &str, sample: &ValueSample) -> String {
    format!(
        "{}: {}",
        python_str_repr(name),
        render_list(sample.values.iter().map(|v| render_value(v)))
    )
}

/// The data prompt for one column, closing with the natural-person question.
pub fn build_data_prompt(ds: &Dataset, col: &Column, sample: &ValueSample) -> Result<String, LlmError> {
    if ds.columns.get(col.position).map(|c| c.name.as_str()) != Some(col.name.as_str()) {
        return Err(LlmError::ColumnNotInDataset(col.name.clone()));
    }
    let features = render_list(ds.column_names().map(python_str_repr));
    Ok(format!(
        "Classify the following column with careful consideration of the dataset description.\n\
         Dataset:\n\
         Title: {title}\n\
         Description: {description}\n\
         Features: {features}\n\
         Column of the dataset to classify: {column}\n\
         {CLOSING_QUESTION}",
        title = ds.title,
        description = ds.prompt_description(),
        column = render_column(&col.name, sample),
    ))
}
