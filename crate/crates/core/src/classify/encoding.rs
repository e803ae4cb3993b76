use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ClassifyError;
use crate::features::{FeatureGroup, FeatureVector};

/// Number of values a binned component can take.
pub const BIN_DOMAIN: u32 = 5;
pub const DEFAULT_F2_TOP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Ordinal bin index in `0..BIN_DOMAIN`.
    Bin,
    /// Semantic-category count.
    Count,
}

/// Column layout fitted on training vectors: the binned components of the
/// present groups, then one count column per retained F2 category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub groups: Vec<FeatureGroup>,
    pub bin_columns: Vec<String>,
    pub f2_categories: Vec<String>,
}

impl FeatureSpace {
    /// Fit on `vectors`, which must all carry the same groups. F2 keeps the
    /// `f2_top` categories with the largest total count (ties by name).
    pub fn fit<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>, f2_top: usize) -> Result<Self, ClassifyError> {
        let mut iter = vectors.into_iter();
        let first = iter.next().ok_or(ClassifyError::EmptyInput)?;
        let groups = first.groups();
        let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
        for v in std::iter::once(first).chain(iter) {
            let g = v.groups();
            if g != groups {
                return Err(ClassifyError::SchemaMismatch { expected: groups, found: g });
            }
            for (k, &n) in v.f2.iter().flatten() {
                *totals.entry(k).or_default() += u64::from(n);
            }
        }
        let mut ranked: Vec<(&str, u64)> = totals.into_iter().filter(|(_, n)| *n > 0).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let f2_categories = ranked.into_iter().take(f2_top).map(|(k, _)| k.to_owned()).collect();
        let bin_columns = first.categorical().into_iter().map(|(g, n, _)| format!("{g}.{n}")).collect();
        let space = FeatureSpace { groups, bin_columns, f2_categories };
        if space.width() == 0 {
            return Err(ClassifyError::EmptySchema);
        }
        Ok(space)
    }

    pub fn width(&self) -> usize {
        self.bin_columns.len() + self.f2_categories.len()
    }

    pub fn kind(&self, column: usize) -> ColumnKind {
        if column < self.bin_columns.len() {
            ColumnKind::Bin
        } else {
            ColumnKind::Count
        }
    }

    pub fn column_name(&self, column: usize) -> String {
        match self.kind(column) {
            ColumnKind::Bin => self.bin_columns[column].clone(),
            ColumnKind::Count => format!("F2.{}", self.f2_categories[column - self.bin_columns.len()]),
        }
    }

    pub fn check(&self, v: &FeatureVector) -> Result<(), ClassifyError> {
        let found = v.groups();
        if found != self.groups {
            return Err(ClassifyError::SchemaMismatch { expected: self.groups.clone(), found });
        }
        Ok(())
    }

    pub fn encode(&self, v: &FeatureVector) -> Result<Vec<u32>, ClassifyError> {
        self.check(v)?;
        let mut row: Vec<u32> = v.categorical().into_iter().map(|(_, _, b)| b as u32).collect();
        let bag = v.f2.as_ref();
        row.extend(
            self.f2_categories
                .iter()
                .map(|c| bag.and_then(|b| b.get(c)).copied().unwrap_or(0)),
        );
        Ok(row)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("space serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_post, Lexicons};
    use crate::corpus::Post;

    fn vec_of(text: &str) -> FeatureVector {
        extract_post(&Post::new("x", text), &Lexicons::bundled()).vector
    }

    #[test]
    fn layout_and_encoding() {
        let a = vec_of("people people time");
        let b = vec_of("people weather");
        let space = FeatureSpace::fit([&a, &b], 2).unwrap();
        assert_eq!(space.bin_columns.len(), 14);
        assert_eq!(space.f2_categories, vec!["S2", "T1"]);
        let row = space.encode(&a).unwrap();
        assert_eq!(row.len(), 16);
        assert_eq!(&row[14..], &[2, 1]);
        assert_eq!(space.column_name(15), "F2.T1");
        assert_eq!(space.kind(0), ColumnKind::Bin);
    }

    #[test]
    fn mixed_groups_rejected() {
        let a = vec_of("people");
        let b = a.without(&[FeatureGroup::F1]);
        assert!(matches!(FeatureSpace::fit([&a, &b], 5), Err(ClassifyError::SchemaMismatch { .. })));
        let space = FeatureSpace::fit([&a], 5).unwrap();
        assert!(space.encode(&b).is_err());
    }

    #[test]
    fn digest_tracks_layout() {
        let a = vec_of("people");
        let s1 = FeatureSpace::fit([&a], 5).unwrap();
        let s2 = FeatureSpace::fit([&a.without(&[FeatureGroup::F4])], 5).unwrap();
        assert_eq!(s1.digest(), FeatureSpace::fit([&a], 5).unwrap().digest());
        assert_ne!(s1.digest(), s2.digest());
        assert_eq!(s1.digest().len(), 64);
    }
}
