use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arch {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ToothKind {
    Incisors,
    Canine,
    Premolars,
    Molars,
}

/// One of the eight arch × tooth-type groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToothCategory {
    pub arch: Arch,
    pub kind: ToothKind,
}

impl ToothCategory {
    /// Report order: upper arch first, incisors to molars.
    pub const ALL: [ToothCategory; 8] = {
        use Arch::*;
        use ToothKind::*;
        [
            ToothCategory {
                arch: Upper,
                kind: Incisors,
            },
            ToothCategory {
                arch: Upper,
                kind: Canine,
            },
            ToothCategory {
                arch: Upper,
                kind: Premolars,
            },
            ToothCategory {
                arch: Upper,
                kind: Molars,
            },
            ToothCategory {
                arch: Lower,
                kind: Incisors,
            },
            ToothCategory {
                arch: Lower,
                kind: Canine,
            },
            ToothCategory {
                arch: Lower,
                kind: Premolars,
            },
            ToothCategory {
                arch: Lower,
                kind: Molars,
            },
        ]
    };

    /// Member labels in ascending order.
    pub fn labels(self) -> Vec<u8> {
        (1..=32)
            .filter(|&l| category_of(l).ok() == Some(self))
            .collect()
    }
}

impl fmt::Display for ToothCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arch = match self.arch {
            Arch::Upper => "Upper",
            Arch::Lower => "Lower",
        };
        let kind = match self.kind {
            ToothKind::Incisors => "incisors",
            ToothKind::Canine => "canine",
            ToothKind::Premolars => "premolars",
            ToothKind::Molars => "molars",
        };
        write!(f, "{arch} {kind}")
    }
}

impl Serialize for ToothCategory {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Universal Numbering: 1–16 run along the upper arch from the patient's
/// right third molar to the left one, 17–32 back along the lower arch.
pub fn category_of(label: u8) -> Result<ToothCategory> {
    use ToothKind::*;
    let (arch, kind) = match label {
        1..=3 | 14..=16 => (Arch::Upper, Molars),
        4..=5 | 12..=13 => (Arch::Upper, Premolars),
        6 | 11 => (Arch::Upper, Canine),
        7..=10 => (Arch::Upper, Incisors),
        17..=19 | 30..=32 => (Arch::Lower, Molars),
        20..=21 | 28..=29 => (Arch::Lower, Premolars),
        22 | 27 => (Arch::Lower, Canine),
        23..=26 => (Arch::Lower, Incisors),
        _ => return Err(Error::InvalidToothLabel(label as u32)),
    };
    Ok(ToothCategory { arch, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(category_of(8).unwrap().to_string(), "Upper incisors");
        assert_eq!(category_of(22).unwrap().to_string(), "Lower canine");
        assert!(matches!(category_of(33), Err(Error::InvalidToothLabel(33))));
        assert!(category_of(0).is_err());
    }

    #[test]
    fn all_lists_each_category_once() {
        let mut v = ToothCategory::ALL.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 8);
        assert_eq!(ToothCategory::ALL[0].labels(), vec![7, 8, 9, 10]);
    }
}
