//! Binary view of the 20 DeSSI column classes.

use std::str::FromStr;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DessiClass {
    PhoneNumber,
    Address,
    Person,
    Email,
    Nin,
    Date,
    Passport,
    Ccn,
    IdCard,
    Sexuality,
    Gender,
    Nationality,
    Race,
    Religion,
    Iban,
    OtherData,
    Organization,
    Gpe,
    SwiftBic,
    Geolocation,
}

impl DessiClass {
    pub const ALL: [DessiClass; 20] = [
        DessiClass::PhoneNumber,
        DessiClass::Address,
        DessiClass::Person,
        DessiClass::Email,
        DessiClass::Nin,
        DessiClass::Date,
        DessiClass::Passport,
        DessiClass::Ccn,
        DessiClass::IdCard,
        DessiClass::Sexuality,
        DessiClass::Gender,
        DessiClass::Nationality,
        DessiClass::Race,
        DessiClass::Religion,
        DessiClass::Iban,
        DessiClass::OtherData,
        DessiClass::Organization,
        DessiClass::Gpe,
        DessiClass::SwiftBic,
        DessiClass::Geolocation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DessiClass::PhoneNumber => "Phone number",
            DessiClass::Address => "Address",
            DessiClass::Person => "Person",
            DessiClass::Email => "Email",
            DessiClass::Nin => "NIN",
            DessiClass::Date => "Date",
            DessiClass::Passport => "Passport",
            DessiClass::Ccn => "CCN",
            DessiClass::IdCard => "ID Card",
            DessiClass::Sexuality => "Sexuality",
            DessiClass::Gender => "Gender",
            DessiClass::Nationality => "Nationality",
            DessiClass::Race => "Race",
            DessiClass::Religion => "Religion",
            DessiClass::Iban => "IBAN",
            DessiClass::OtherData => "Other data",
            DessiClass::Organization => "Organization",
            DessiClass::Gpe => "GPE",
            DessiClass::SwiftBic => "SWIFT/BIC",
            DessiClass::Geolocation => "Geolocation",
        }
    }

    pub fn is_personal(self) -> bool {
        !matches!(
            self,
            DessiClass::OtherData
                | DessiClass::Organization
                | DessiClass::Gpe
                | DessiClass::SwiftBic
                | DessiClass::Geolocation
        )
    }
}

impl FromStr for DessiClass {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DessiClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| EvalError::UnknownClass(s.to_string()))
    }
}

/// A column is personal if any of its classes is.
pub fn map_dessi<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<bool, EvalError> {
    let mut personal = false;
    for name in labels {
        personal |= name.parse::<DessiClass>()?.is_personal();
    }
    Ok(personal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn class_counts() {
        let personal = DessiClass::ALL.iter().filter(|c| c.is_personal()).count();
        assert_eq!((personal, DessiClass::ALL.len() - personal), (15, 5));
        for c in DessiClass::ALL {
            assert_eq!(c.name().parse::<DessiClass>().unwrap(), c);
        }
    }

    #[test]
    fn mapping_examples() {
        assert!(map_dessi(["Email"]).unwrap());
        assert!(!map_dessi(["Organization", "GPE"]).unwrap());
        assert!(map_dessi(["Organization", "Email"]).unwrap());
        assert!(matches!(map_dessi(["Company"]), Err(EvalError::UnknownClass(c)) if c == "Company"));
    }

    proptest! {
        #[test]
        fn adding_classes_keeps_personal(
            base in proptest::collection::vec(0usize..20, 1..6),
            extra in proptest::collection::vec(0usize..20, 0..6),
        ) {
            let names = |ix: &[usize]| ix.iter().map(|i| DessiClass::ALL[*i].name()).collect::<Vec<_>>();
            let before = map_dessi(names(&base)).unwrap();
            let mut all = names(&base);
            all.extend(names(&extra));
            let after = map_dessi(all).unwrap();
            prop_assert!(!before || after);
        }
    }
}
