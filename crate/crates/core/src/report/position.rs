use crate::table::TableDocument;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// Granularity of a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocatedIn {
    Item,
    Field,
    Row,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub located_in: LocatedIn,
    pub table: PositionTable,
}

/// Row index → field name → item indices.
///
/// Serialized as nested JSON objects with stringified row keys. Rows are
/// kept in numeric order; fields keep their insertion order until
/// [`PositionTable::sort_fields`] is applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositionTable(BTreeMap<usize, Vec<(String, Vec<usize>)>>);

impl PositionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `items` of `field` in `row`, merging with what is already there.
    pub fn add(&mut self, row: usize, field: &str, items: impl IntoIterator<Item = usize>) {
        let fields = self.0.entry(row).or_default();
        let slot = match fields.iter().position(|(f, _)| f == field) {
            Some(i) => &mut fields[i].1,
            None => {
                fields.push((field.to_string(), Vec::new()));
                &mut fields.last_mut().expect("just pushed").1
            }
        };
        slot.extend(items);
        slot.sort_unstable();
        slot.dedup();
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn row_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    /// Every (row, field, items) triple, rows ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, &str, &[usize])> {
        self.0.iter().flat_map(|(row, fields)| {
            fields
                .iter()
                .map(move |(f, items)| (*row, f.as_str(), items.as_slice()))
        })
    }

    /// Every (row, field, item) triple.
    pub fn items(&self) -> impl Iterator<Item = (usize, &str, usize)> {
        self.pairs()
            .flat_map(|(row, field, items)| items.iter().map(move |i| (row, field, *i)))
    }

    pub fn first(&self) -> Option<(usize, &str, Option<usize>)> {
        self.pairs()
            .next()
            .map(|(row, field, items)| (row, field, items.first().copied()))
    }

    pub fn sort_fields(&mut self, rank: impl Fn(&str) -> Option<usize>) {
        for fields in self.0.values_mut() {
            fields.sort_by_key(|(f, _)| (rank(f).unwrap_or(usize::MAX), f.clone()));
        }
    }

    /// (first row, header rank of its first field, first item).
    pub fn sort_key(&self, document: &TableDocument) -> (usize, usize, usize) {
        match self.first() {
            Some((row, field, item)) => (
                row,
                document.field_position(field).unwrap_or(usize::MAX),
                item.unwrap_or(0),
            ),
            None => (usize::MAX, usize::MAX, usize::MAX),
        }
    }
}

struct FieldMap<'a>(&'a [(String, Vec<usize>)]);

impl Serialize for FieldMap<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (field, items) in self.0 {
            map.serialize_entry(field, items)?;
        }
        map.end()
    }
}

impl Serialize for PositionTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (row, fields) in &self.0 {
            map.serialize_entry(&row.to_string(), &FieldMap(fields))?;
        }
        map.end()
    }
}

struct OrderedFields(Vec<(String, Vec<usize>)>);

impl<'de> Deserialize<'de> for OrderedFields {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedFields;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from field names to item index lists")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut fields = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, Vec<usize>>()? {
                    fields.push((k, v));
                }
                Ok(OrderedFields(fields))
            }
        }
        deserializer.deserialize_map(V)
    }
}

impl<'de> Deserialize<'de> for PositionTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PositionTable;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from row indices to field maps")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut table = PositionTable::new();
                while let Some((k, v)) = access.next_entry::<String, OrderedFields>()? {
                    let row: usize = k
                        .parse()
                        .map_err(|_| serde::de::Error::custom(format!("row key '{k}' is not an index")))?;
                    for (field, items) in v.0 {
                        table.add(row, &field, items);
                    }
                }
                Ok(table)
            }
        }
        deserializer.deserialize_map(V)
    }
}
