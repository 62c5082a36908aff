// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Int64,
    Float64,
    Utf8,
}

impl DataType {
    /// Width in bytes of one value, `None` for variable-width kinds.
    pub fn byte_width(self) -> Option<usize> {
        match self {
            DataType::Int64 | DataType::Float64 => Some(8),
            DataType::Utf8 => None,
        }
    }

    /// Tag used in the batch message layout.
    pub fn tag(self) -> u8 {
        match self {
            DataType::Int64 => 1,
            DataType::Float64 => 2,
            DataType::Utf8 => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(DataType::Int64),
            2 => Some(DataType::Float64),
            3 => Some(DataType::Utf8),
            _ => None,
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DataType::Int64 => "int64",
            DataType::Float64 => "float64",
            DataType::Utf8 => "utf8",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub dtype: DataType,
    pub nullable: bool,
}

impl Field {
    pub fn new(name: impl Into<String>, dtype: DataType, nullable: bool) -> Self {
        Self {
            name: name.into(),
            dtype,
            nullable,
        }
    }
}

/// Ordered list of uniquely named fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Field>", into = "Vec<Field>")]
pub struct Schema {
    fields: Vec<Field>,
}

pub type SchemaRef = Arc<Schema>;

impl Schema {
    pub fn try_new(fields: Vec<Field>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(fields.len());
        for f in &fields {
            if f.name.is_empty() {
                return Err(Error::Schema("empty field name".into()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate field name {:?}", f.name)));
            }
        }
        Ok(Self { fields })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &Field {
        &self.fields[i]
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.name.as_str())
    }

    /// Schema made of the given field indices, in the given order.
    pub fn project(&self, indices: &[usize]) -> Result<Schema> {
        let mut fields = Vec::with_capacity(indices.len());
        for &i in indices {
            let f = self.fields.get(i).ok_or(Error::ColumnOutOfRange {
                index: i,
                width: self.fields.len(),
            })?;
            fields.push(f.clone());
        }
        Schema::try_new(fields)
    }

    /// Sum of fixed value widths; variable-width columns count as 0.
    pub fn fixed_row_width(&self) -> usize {
        self.fields
            .iter()
            .filter_map(|f| f.dtype.byte_width())
            .sum()
    }
}

impl TryFrom<Vec<Field>> for Schema {
    type Error = Error;

    fn try_from(fields: Vec<Field>) -> Result<Self> {
        Schema::try_new(fields)
    }
}

impl From<Schema> for Vec<Field> {
    fn from(s: Schema) -> Self {
        s.fields
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", field.name, field.dtype)?;
            if field.nullable {
                f.write_str("?")?;
            }
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty_names() {
        let dup = Schema::try_new(vec![
            Field::new("a", DataType::Int64, false),
            Field::new("a", DataType::Utf8, false),
        ]);
        assert!(matches!(dup, Err(Error::Schema(_))));
        assert!(Schema::try_new(vec![Field::new("", DataType::Int64, false)]).is_err());
    }

    #[test]
    fn json_shape() {
        let s = Schema::try_new(vec![Field::new("age", DataType::Int64, true)]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"name":"age","dtype":"int64","nullable":true}]"#);
        let back: Schema = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Schema>(
            r#"[{"name":"a","dtype":"int64","nullable":true},{"name":"a","dtype":"utf8","nullable":true}]"#
        )
        .is_err());
    }

    #[test]
    fn project_keeps_order() {
        let s = Schema::try_new(vec![
            Field::new("a", DataType::Int64, false),
            Field::new("b", DataType::Float64, false),
            Field::new("c", DataType::Utf8, false),
        ])
        .unwrap();
        let p = s.project(&[2, 0]).unwrap();
        assert_eq!(p.names().collect::<Vec<_>>(), ["c", "a"]);
        assert!(s.project(&[3]).is_err());
        assert_eq!(s.fixed_row_width(), 16);
    }
}
