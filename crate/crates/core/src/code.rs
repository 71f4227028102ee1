//! Stabilizer code definitions: parsing, CSS construction, validation and
//! stabilizer-group enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliOperator};

/// Default cap on the number of generators accepted by [`enumerate_group`].
pub const DEFAULT_GROUP_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub generators: Vec<PauliOperator>,
    pub logical_x: Vec<PauliOperator>,
    pub logical_z: Vec<PauliOperator>,
    /// Generators whose outcome is recorded rather than post-selected.
    pub gauge_indices: Vec<usize>,
}

impl StabilizerCode {
    pub fn gauge_count(&self) -> usize {
        self.gauge_indices.len()
    }

    /// `Ȳ_i = i·X̄_i·Z̄_i`, Hermitian whenever the two logicals anticommute.
    pub fn logical_y(&self, i: usize) -> Result<PauliOperator> {
        let x = self.logical_x.get(i).ok_or(Error::OutputIndex {
            index: i,
            k: self.k,
        })?;
        let z = self.logical_z.get(i).ok_or(Error::OutputIndex {
            index: i,
            k: self.k,
        })?;
        Ok(x.multiply(z)?.times_i_pow(1))
    }
}

/// All `2^{n-k}` products of generator subsets.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    pub elements: Vec<PauliOperator>,
}

/// One row of a CSS parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CssRow {
    /// 0/1 entries, one per qubit.
    Dense(Vec<u8>),
    /// 1-based indices of the nonzero entries.
    Sparse(Vec<usize>),
}

impl CssRow {
    fn support(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            CssRow::Dense(bits) => {
                if bits.len() != n {
                    return Err(Error::InvalidCode(format!(
                        "parity-check row has {} entries, expected {n}",
                        bits.len()
                    )));
                }
                let mut out = Vec::new();
                for (q, &b) in bits.iter().enumerate() {
                    match b {
                        0 => {}
                        1 => out.push(q),
                        other => {
                            return Err(Error::InvalidCode(format!(
                                "parity-check entry {other} is not binary"
                            )))
                        }
                    }
                }
                Ok(out)
            }
            CssRow::Sparse(idx) => idx
                .iter()
                .map(|&i| {
                    if i == 0 || i > n {
                        Err(Error::InvalidCode(format!(
                            "sparse index {i} out of range 1..={n}"
                        )))
                    } else {
                        Ok(i - 1)
                    }
                })
                .collect(),
        }
    }
}

/// Builds all-X generators from `hx` and all-Z generators from `hz`.
pub fn css_generators(n: usize, hx: &[CssRow], hz: &[CssRow]) -> Result<Vec<PauliOperator>> {
    let mut gens = Vec::with_capacity(hx.len() + hz.len());
    for (rows, letter) in [(hx, Letter::X), (hz, Letter::Z)] {
        for row in rows {
            let support = row.support(n)?;
            if support.is_empty() {
                return Err(Error::InvalidCode(
                    "all-zero parity-check row gives a dependent identity generator".into(),
                ));
            }
            gens.push(PauliOperator::from_support(n, &support, letter)?);
        }
    }
    let x_count = hx.len();
    for (i, gx) in gens[..x_count].iter().enumerate() {
        for (j, gz) in gens[x_count..].iter().enumerate() {
            if !gx.commutes(gz)? {
                return Err(Error::InvalidCode(format!(
                    "X row {i} and Z row {j} overlap on an odd number of qubits"
                )));
            }
        }
    }
    Ok(gens)
}

pub fn css_from_matrices(
    name: &str,
    n: usize,
    hx: &[CssRow],
    hz: &[CssRow],
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
) -> Result<StabilizerCode> {
    let generators = css_generators(n, hx, hz)?;
    Ok(StabilizerCode {
        name: name.to_string(),
        n,
        k: logical_x.len(),
        generators,
        logical_x,
        logical_z,
        gauge_indices: Vec::new(),
    })
}

/// Raw monomial lists of a hand-entered map; each entry is `[w_x, w_y, w_z, coeff]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualMapTerms {
    pub numerator_x: Vec<[i64; 4]>,
    pub numerator_y: Vec<[i64; 4]>,
    pub numerator_z: Vec<[i64; 4]>,
    pub denominator: Vec<[i64; 4]>,
    pub scale_exp: u32,
}

/// A parsed code-definition document.
#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    Code(StabilizerCode),
    Manual { name: String, terms: ManualMapTerms },
}

impl Protocol {
    pub fn name(&self) -> &str {
        match self {
            Protocol::Code(c) => &c.name,
            Protocol::Manual { name, .. } => name,
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| {
        perr(
            line,
            format!("`{key}` expects a nonnegative integer, got {v:?}"),
        )
    })
}

fn parse_indexed_key(key: &str, base: &str) -> Option<Option<usize>> {
    let rest = key.strip_prefix(base)?;
    if rest.is_empty() {
        return Some(None);
    }
    let idx = rest.strip_prefix('[')?.strip_suffix(']')?;
    idx.trim().parse().ok().map(Some)
}

fn place(slot: &mut Vec<Option<PauliOperator>>, idx: Option<usize>, op: PauliOperator) {
    let i = idx.unwrap_or(slot.len());
    if slot.len() <= i {
        slot.resize(i + 1, None);
    }
    slot[i] = Some(op);
}

/// Parses a code-definition document (see the crate README for the format).
pub fn parse_document(text: &str) -> Result<Protocol> {
    let mut name = None;
    let mut n = None;
    let mut k = None;
    let mut generators: Vec<(usize, PauliOperator)> = Vec::new();
    let mut lx: Vec<Option<PauliOperator>> = Vec::new();
    let mut lz: Vec<Option<PauliOperator>> = Vec::new();
    let mut gauge = Vec::new();
    let mut hx = Vec::new();
    let mut hz = Vec::new();
    let mut manual = ManualMapTerms::default();
    let mut has_manual = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| perr(line, "expected `key: value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "name" => name = Some(value.to_string()),
            "n" => n = Some(parse_usize(line, key, value)?),
            "k" => k = Some(parse_usize(line, key, value)?),
            "generator" => {
                let op: PauliOperator = value.parse().map_err(|e| perr(line, format!("{e}")))?;
                generators.push((line, op));
            }
            "gauge" => {
                for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    gauge.push(parse_usize(line, key, part)?);
                }
            }
            "hx_row" | "hz_row" => {
                let bits = value
                    .split_whitespace()
                    .map(|b| {
                        b.parse::<u8>()
                            .map_err(|_| perr(line, format!("bad bit {b:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let row = (line, CssRow::Dense(bits));
                if key == "hx_row" {
                    hx.push(row)
                } else {
                    hz.push(row)
                }
            }
            "hx_row_sparse" | "hz_row_sparse" => {
                let idx = value
                    .split_whitespace()
                    .map(|b| parse_usize(line, key, b))
                    .collect::<Result<Vec<_>>>()?;
                let row = (line, CssRow::Sparse(idx));
                if key == "hx_row_sparse" {
                    hx.push(row)
                } else {
                    hz.push(row)
                }
            }
            "manual_numerator_x" | "manual_numerator_y" | "manual_numerator_z"
            | "manual_denominator" => {
                let terms: Vec<[i64; 4]> = serde_json::from_str(value)
                    .map_err(|e| perr(line, format!("monomial list: {e}")))?;
                has_manual = true;
                match key {
                    "manual_numerator_x" => manual.numerator_x = terms,
                    "manual_numerator_y" => manual.numerator_y = terms,
                    "manual_numerator_z" => manual.numerator_z = terms,
                    _ => manual.denominator = terms,
                }
            }
            "manual_scale_exp" => {
                manual.scale_exp = parse_usize(line, key, value)? as u32;
                has_manual = true;
            }
            other => {
                if let Some(idx) = parse_indexed_key(other, "logical_x") {
                    let op = value.parse().map_err(|e| perr(line, format!("{e}")))?;
                    place(&mut lx, idx, op);
                } else if let Some(idx) = parse_indexed_key(other, "logical_z") {
                    let op = value.parse().map_err(|e| perr(line, format!("{e}")))?;
                    place(&mut lz, idx, op);
                } else {
                    return Err(perr(line, format!("unknown key `{other}`")));
                }
            }
        }
    }

    let name = name.ok_or_else(|| perr(0, "missing `name`"))?;
    if has_manual {
        if manual.denominator.is_empty() {
            return Err(perr(0, "manual map needs a non-empty `manual_denominator`"));
        }
        return Ok(Protocol::Manual {
            name,
            terms: manual,
        });
    }

    let n = n.ok_or_else(|| perr(0, "missing `n`"))?;
    let mut gens = Vec::new();
    for (line, g) in generators {
        if g.num_qubits() != n {
            return Err(perr(
                line,
                format!("generator has {} qubits, expected {n}", g.num_qubits()),
            ));
        }
        gens.push(g);
    }
    let first_line = |rows: &[(usize, CssRow)]| rows.first().map(|r| r.0).unwrap_or(0);
    let hx_rows: Vec<CssRow> = hx.iter().map(|r| r.1.clone()).collect();
    let hz_rows: Vec<CssRow> = hz.iter().map(|r| r.1.clone()).collect();
    let css = css_generators(n, &hx_rows, &hz_rows)
        .map_err(|e| perr(first_line(&hx).max(first_line(&hz)), e.to_string()))?;
    gens.extend(css);

    let collect = |v: Vec<Option<PauliOperator>>, what: &str| -> Result<Vec<PauliOperator>> {
        v.into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| perr(0, format!("missing {what}[{i}]"))))
            .collect()
    };
    let logical_x = collect(lx, "logical_x")?;
    let logical_z = collect(lz, "logical_z")?;
    for op in logical_x.iter().chain(&logical_z) {
        if op.num_qubits() != n {
            return Err(perr(
                0,
                format!("logical {op} has wrong length, expected {n}"),
            ));
        }
    }
    let k = k.unwrap_or(logical_x.len());
    if k != logical_x.len() || k != logical_z.len() {
        return Err(perr(
            0,
            format!(
                "k = {k} but {} logical_x and {} logical_z given",
                logical_x.len(),
                logical_z.len()
            ),
        ));
    }
    Ok(Protocol::Code(StabilizerCode {
        name,
        n,
        k,
        generators: gens,
        logical_x,
        logical_z,
        gauge_indices: gauge,
    }))
}

/// Parses a document that must describe a stabilizer code (not a manual map).
pub fn parse_code(text: &str) -> Result<StabilizerCode> {
    match parse_document(text)? {
        Protocol::Code(c) => Ok(c),
        Protocol::Manual { name, .. } => Err(Error::InvalidCode(format!(
            "{name} is a manual map entry, not a stabilizer code"
        ))),
    }
}

/// Serializes a code back to the document format.
pub fn to_document(code: &StabilizerCode) -> String {
    let mut out = format!("name: {}\nn: {}\nk: {}\n", code.name, code.n, code.k);
    for g in &code.generators {
        out.push_str(&format!("generator: {g}\n"));
    }
    for (i, (x, z)) in code.logical_x.iter().zip(&code.logical_z).enumerate() {
        out.push_str(&format!("logical_x[{i}]: {x}\nlogical_z[{i}]: {z}\n"));
    }
    if !code.gauge_indices.is_empty() {
        let g: Vec<String> = code.gauge_indices.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("gauge: {}\n", g.join(",")));
    }
    out
}

/// Rank over GF(2) of the symplectic vectors of `ops`.
pub fn symplectic_rank(ops: &[PauliOperator]) -> usize {
    let mut rows: Vec<Vec<u64>> = ops
        .iter()
        .map(|p| {
            let (x, z) = p.symplectic_words();
            x.iter().chain(z).copied().collect()
        })
        .collect();
    let width = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for bit in 0..width {
        let (w, b) = (bit / 64, bit % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && (row[w] >> b) & 1 == 1 {
                for (a, p) in row.iter_mut().zip(&pivot_row) {
                    *a ^= p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of a stabilizer code.
pub fn validate(code: &StabilizerCode) -> ValidationReport {
    let mut v = Vec::new();
    let n = code.n;
    if code.k > n {
        v.push(format!("k = {} exceeds n = {n}", code.k));
    }
    let all = code
        .generators
        .iter()
        .chain(&code.logical_x)
        .chain(&code.logical_z);
    let mut lengths_ok = true;
    for op in all {
        if op.num_qubits() != n {
            v.push(format!(
                "operator {op} acts on {} qubits, expected {n}",
                op.num_qubits()
            ));
            lengths_ok = false;
        }
    }
    if !lengths_ok {
        return ValidationReport { violations: v };
    }
    let expected = n.saturating_sub(code.k);
    if code.generators.len() != expected {
        v.push(format!(
            "{} generators given, expected n - k = {expected}",
            code.generators.len()
        ));
    }
    if code.logical_x.len() != code.k || code.logical_z.len() != code.k {
        v.push(format!(
            "expected {} logical X and Z operators, found {} and {}",
            code.k,
            code.logical_x.len(),
            code.logical_z.len()
        ));
    }
    for (i, g) in code.generators.iter().enumerate() {
        if !g.is_hermitian() {
            v.push(format!("generator {i} ({g}) is not Hermitian"));
        }
        if g.is_scalar() {
            v.push(format!("generator {i} is proportional to the identity"));
        }
    }
    for i in 0..code.generators.len() {
        for j in i + 1..code.generators.len() {
            if !code.generators[i]
                .commutes(&code.generators[j])
                .unwrap_or(false)
            {
                v.push(format!("generators {i} and {j} anticommute"));
            }
        }
    }
    let rank = symplectic_rank(&code.generators);
    if rank != code.generators.len() {
        v.push(format!(
            "generators are dependent: symplectic rank {rank} < {}",
            code.generators.len()
        ));
    }
    for (label, ops) in [
        ("logical_x", &code.logical_x),
        ("logical_z", &code.logical_z),
    ] {
        for (i, l) in ops.iter().enumerate() {
            if !l.is_hermitian() {
                v.push(format!("{label}[{i}] is not Hermitian"));
            }
            for (j, g) in code.generators.iter().enumerate() {
                if !l.commutes(g).unwrap_or(false) {
                    v.push(format!("{label}[{i}] anticommutes with generator {j}"));
                }
            }
        }
    }
    for (i, x) in code.logical_x.iter().enumerate() {
        for (j, z) in code.logical_z.iter().enumerate() {
            let commute = x.commutes(z).unwrap_or(true);
            if i == j && commute {
                v.push(format!("logical_x[{i}] commutes with logical_z[{i}]"));
            } else if i != j && !commute {
                v.push(format!("logical_x[{i}] anticommutes with logical_z[{j}]"));
            }
        }
        for (j, x2) in code.logical_x.iter().enumerate().skip(i + 1) {
            if !x.commutes(x2).unwrap_or(true) {
                v.push(format!("logical_x[{i}] anticommutes with logical_x[{j}]"));
            }
        }
    }
    for (i, z) in code.logical_z.iter().enumerate() {
        for (j, z2) in code.logical_z.iter().enumerate().skip(i + 1) {
            if !z.commutes(z2).unwrap_or(true) {
                v.push(format!("logical_z[{i}] anticommutes with logical_z[{j}]"));
            }
        }
    }
    for &g in &code.gauge_indices {
        if g >= code.generators.len() {
            v.push(format!("gauge index {g} out of range"));
        }
    }
    ValidationReport { violations: v }
}

/// Enumerates the stabilizer group by walking the generator subsets in Gray
/// code order, so each element costs one multiplication.
pub fn enumerate_group(code: &StabilizerCode, cap: usize) -> Result<StabilizerGroup> {
    let m = code.generators.len();
    if m > cap || m >= usize::BITS as usize {
        return Err(Error::GroupTooLarge { generators: m, cap });
    }
    let mut elements = Vec::with_capacity(1 << m);
    let mut current = PauliOperator::identity(code.n);
    elements.push(current.clone());
    for i in 1usize..(1 << m) {
        let flip = i.trailing_zeros() as usize;
        current = current.multiply(&code.generators[flip])?;
        if !current.is_hermitian() {
            return Err(Error::InvalidCode(format!(
                "group element {current} is not Hermitian; generators must commute"
            )));
        }
        elements.push(current.clone());
    }
    Ok(StabilizerGroup { elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const THREE: &str = "name: 311\nn: 3\nk: 1\ngenerator: XZI\ngenerator: ZXX\nlogical_x[0]: IZZ\nlogical_z[0]: IIX\n";

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn parses_three_qubit_code() {
        let c = parse_code(THREE).unwrap();
        assert_eq!((c.n, c.k), (3, 1));
        assert_eq!(c.generators, vec![p("XZI"), p("ZXX")]);
        assert!(validate(&c).is_valid());
    }

    #[test]
    fn parses_four_qubit_code() {
        let doc = "name: 411\nn: 4\nk: 1\ngenerator: XZII\ngenerator: ZXZX\ngenerator: IZXI\nlogical_x[0]: IZIZ\nlogical_z[0]: IIIX\n";
        let c = parse_code(doc).unwrap();
        assert_eq!((c.n, c.k), (4, 1));
        assert!(validate(&c).is_valid());
    }

    #[test]
    fn trivial_code_has_no_projection() {
        let c =
            parse_code("name: trivial\nn: 1\nk: 1\nlogical_x[0]: X\nlogical_z[0]: Z\n").unwrap();
        assert!(validate(&c).is_valid());
        let g = enumerate_group(&c, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.elements, vec![PauliOperator::identity(1)]);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_code("name: a\nn: 3\ngenerator: XZ\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "generator has 2 qubits, expected 3".into()
            }
        );
        let err = parse_code("name: a\nn: 2\nbogus: 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err =
            parse_code("name: a\nn: 2\nk: 2\nlogical_x[0]: XI\nlogical_z[0]: ZI\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(parse_code("name a").is_err());
    }

    #[test]
    fn css_rows() {
        let row = CssRow::Dense(vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let g = css_generators(15, &[row], &[]).unwrap();
        assert_eq!(g[0], p("XIXIXIXIXIXIXIX"));
        let g = css_generators(14, &[], &[CssRow::Sparse(vec![2, 3, 4, 5])]).unwrap();
        assert_eq!(g[0], p("IZZZZIIIIIIIII"));
        assert!(css_generators(3, &[CssRow::Dense(vec![0, 0, 0])], &[]).is_err());
        assert!(css_generators(3, &[], &[CssRow::Sparse(vec![4])]).is_err());
        assert!(css_generators(3, &[CssRow::Dense(vec![1, 1])], &[]).is_err());
        let bad = css_generators(
            2,
            &[CssRow::Dense(vec![1, 0])],
            &[CssRow::Dense(vec![1, 1])],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn five_qubit_code_valid() {
        let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"].map(p).to_vec();
        let c = StabilizerCode {
            name: "five".into(),
            n: 5,
            k: 1,
            generators: gens,
            logical_x: vec![p("XXXXX")],
            logical_z: vec![p("ZZZZZ")],
            gauge_indices: vec![],
        };
        assert!(validate(&c).is_valid(), "{}", validate(&c));
    }

    #[test]
    fn invalid_codes_reported() {
        let c = StabilizerCode {
            name: "bad".into(),
            n: 2,
            k: 1,
            generators: vec![p("XX"), p("ZZ")],
            logical_x: vec![],
            logical_z: vec![],
            gauge_indices: vec![],
        };
        let r = validate(&c);
        assert!(!r.is_valid());
        assert!(r.violations.iter().any(|v| v.contains("expected n - k")));
        assert!(r.violations.iter().any(|v| v.contains("logical")));

        let dep = StabilizerCode {
            name: "dep".into(),
            n: 3,
            k: 1,
            generators: vec![p("ZZI"), p("ZZI")],
            logical_x: vec![p("XII")],
            logical_z: vec![p("ZII")],
            gauge_indices: vec![5],
        };
        let r = validate(&dep);
        assert!(r.violations.iter().any(|v| v.contains("dependent")));
        assert!(r.violations.iter().any(|v| v.contains("gauge index")));
        assert!(r
            .violations
            .iter()
            .any(|v| v.contains("anticommutes with generator")));
    }

    #[test]
    fn three_qubit_group() {
        let c = parse_code(THREE).unwrap();
        let g = enumerate_group(&c, DEFAULT_GROUP_CAP).unwrap();
        let set: HashSet<String> = g.elements.iter().map(|e| e.to_string()).collect();
        let want: HashSet<String> = ["III", "XZI", "ZXX", "YYX"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(set, want);
    }

    #[test]
    fn group_cap() {
        let c = parse_code(THREE).unwrap();
        assert_eq!(
            enumerate_group(&c, 1).unwrap_err(),
            Error::GroupTooLarge {
                generators: 2,
                cap: 1
            }
        );
    }

    #[test]
    fn document_round_trip() {
        let c = parse_code(THREE).unwrap();
        assert_eq!(parse_code(&to_document(&c)).unwrap(), c);
    }

    #[test]
    fn logical_y_is_hermitian() {
        let c = parse_code(THREE).unwrap();
        let y = c.logical_y(0).unwrap();
        assert!(y.is_hermitian());
        assert_eq!(y, p("-IZY"));
        assert!(c.logical_y(1).is_err());
    }
}
