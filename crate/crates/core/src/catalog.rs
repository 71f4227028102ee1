//! Built-in protocol definitions.
//!
//! Entries are embedded at compile time. When `MAGICFLOW_CATALOG_DIR` is set,
//! a file `<dir>/<name>.code` takes precedence over the embedded document.

use std::path::Path;

use crate::code::{parse_document, Protocol};
use crate::error::{Error, Result};
use crate::map::{build_map, map_from_manual, DistillationMap, Plane};

pub const CATALOG_DIR_ENV: &str = "MAGICFLOW_CATALOG_DIR";

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    /// Plane in which the protocol is usually analyzed.
    pub plane: Plane,
    pub document: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "311",
        aliases: &["3"],
        plane: Plane::Y0,
        document: include_str!("../catalog/311.code"),
    },
    CatalogEntry {
        name: "411",
        aliases: &["4"],
        plane: Plane::Y0,
        document: include_str!("../catalog/411.code"),
    },
    CatalogEntry {
        name: "513",
        aliases: &["5", "five"],
        plane: Plane::Z0,
        document: include_str!("../catalog/513.code"),
    },
    CatalogEntry {
        name: "612",
        aliases: &["6", "six"],
        plane: Plane::Y0,
        document: include_str!("../catalog/612.code"),
    },
    CatalogEntry {
        name: "steane",
        aliases: &["713", "7"],
        plane: Plane::Z0,
        document: include_str!("../catalog/steane.code"),
    },
    CatalogEntry {
        name: "1422",
        aliases: &["14"],
        plane: Plane::Z0,
        document: include_str!("../catalog/1422.code"),
    },
    CatalogEntry {
        name: "15",
        aliases: &["1513", "rm", "reed-muller"],
        plane: Plane::Z0,
        document: include_str!("../catalog/15.code"),
    },
];

pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    let key = name.trim().to_ascii_lowercase();
    CATALOG
        .iter()
        .find(|e| e.name == key || e.aliases.contains(&key.as_str()))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Document text for a catalog entry, honoring the override directory.
pub fn catalog_document(name: &str) -> Result<String> {
    let e = entry(name).ok_or_else(|| Error::UnknownCode(name.to_string()))?;
    if let Some(dir) = std::env::var_os(CATALOG_DIR_ENV) {
        let path = Path::new(&dir).join(format!("{}.code", e.name));
        if path.is_file() {
            return read_file(&path);
        }
    }
    Ok(e.document.to_string())
}

/// Resolves a catalog name first, then a path to a code-definition file.
pub fn load_protocol(name_or_path: &str) -> Result<Protocol> {
    if entry(name_or_path).is_some() {
        return parse_document(&catalog_document(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return parse_document(&read_file(path)?);
    }
    Err(Error::UnknownCode(name_or_path.to_string()))
}

pub fn protocol_map(protocol: &Protocol) -> Result<DistillationMap> {
    match protocol {
        Protocol::Code(code) => build_map(code),
        Protocol::Manual { name, terms } => map_from_manual(name, terms),
    }
}

pub fn load_map(name_or_path: &str) -> Result<DistillationMap> {
    protocol_map(&load_protocol(name_or_path)?)
}

/// Analysis plane of a catalog entry, or `z=0` for anything else.
pub fn default_plane(name: &str) -> Plane {
    entry(name).map(|e| e.plane).unwrap_or(Plane::Z0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::validate;

    #[test]
    fn every_entry_parses_and_validates() {
        for e in CATALOG {
            match parse_document(e.document).unwrap() {
                Protocol::Code(c) => {
                    let r = validate(&c);
                    assert!(r.is_valid(), "{}: {r}", e.name);
                    assert_eq!(c.name, e.name);
                }
                Protocol::Manual { name, .. } => assert_eq!(name, e.name),
            }
        }
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(entry("Steane").unwrap().name, "steane");
        assert_eq!(entry("rm").unwrap().name, "15");
        assert!(entry("nonexist").is_none());
        assert!(matches!(
            load_protocol("nonexist"),
            Err(Error::UnknownCode(_))
        ));
    }

    #[test]
    fn reed_muller_gauge_generators() {
        let Protocol::Code(c) = load_protocol("15").unwrap() else {
            panic!("expected a code")
        };
        assert_eq!(c.generators.len(), 14);
        assert_eq!(c.gauge_count(), 10);
        assert_eq!(c.generators[0].to_string(), "XIXIXIXIXIXIXIX");
    }
}
