//! Canonical text for tables and certificates.
//!
//! Every artifact is one block: a `<tag> <node>` line, one line per entry in
//! ascending key order, and `end`. A missing port (the node's own entry) is
//! written `-`. A bundle is a `bundle` header followed by the table block and
//! the certificate block of every node in id order; verifiers built from a
//! bundle see nothing but the parsed text.
//!
//! ```text
//! tz-table <v>        landmark <id> <port>  cluster <id> <port>
//! tz-cert <v>         landmark-dist <id> <d>  cluster <id> <d> <l> <d(l)>
//! ni-table <v>        tz-table lines, ball <id> <port>, hash <a> <b> <colors>, dir <id> <l> <port>
//! ni-cert <v>         tz-cert lines, ball-dist <id> <d>, family <r> <k>, f <hex>, matrix <k> <colors> <bits>
//! hk-table <v>        levels <l0> .., bunch <id> <level>, cluster <id> <port>,
//!                     tree <root> <label> <end> <parent>, child <start> <end> <port>
//! hk-cert <v>         level-dist <d0> .., bunch-dist <id> <d>, cluster <id> <d> <bound>
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;
use std::sync::Arc;

use certroute_core::color::ColorHash;
use certroute_core::fingerprint::{BitString, FMatrix, HashFamily};
use certroute_core::hk::HkTable;
use certroute_core::hk_cert::{hk_verify, HkCertificate, HkClusterCert};
use certroute_core::ni::{DirTriple, NiParams, NiTable};
use certroute_core::ni_cert::{ni_verify, NiCertificate};
use certroute_core::tree::{TreeChild, TreeTable};
use certroute_core::tz::TzTable;
use certroute_core::tz_cert::{tz_verify, ClusterCert, TzCertificate};
use certroute_core::{NodeId, Port, Verdict, WeightedGraph};

use crate::error::{Error, ParseError};

/// Tokenized non-empty lines with their 1-based numbers.
pub struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, t)| !t.is_empty()),
        );
        Lines { inner: it.peekable(), last: 0 }
    }

    pub fn next_line(&mut self) -> Result<(usize, Vec<&'a str>), ParseError> {
        let (n, toks) = self.inner.next().ok_or_else(|| ParseError::new(self.last + 1, "unexpected end of input"))?;
        self.last = n;
        Ok((n, toks))
    }

    pub fn peek_word(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, t)| t[0])
    }

    pub fn is_done(&mut self) -> bool {
        self.inner.peek().is_none()
    }
}

fn field<T: FromStr>(toks: &[&str], i: usize, line: usize) -> Result<T, ParseError> {
    let tok = toks.get(i).ok_or_else(|| ParseError::new(line, format!("`{}` needs field {i}", toks[0])))?;
    tok.parse().map_err(|_| ParseError::new(line, format!("bad field `{tok}`")))
}

fn id(toks: &[&str], i: usize, line: usize) -> Result<NodeId, ParseError> {
    field(toks, i, line).map(NodeId)
}

fn opt<T: FromStr>(toks: &[&str], i: usize, line: usize) -> Result<Option<T>, ParseError> {
    if toks.get(i) == Some(&"-") {
        Ok(None)
    } else {
        field(toks, i, line).map(Some)
    }
}

fn port(toks: &[&str], i: usize, line: usize) -> Result<Option<Port>, ParseError> {
    opt::<u32>(toks, i, line).map(|p| p.map(Port))
}

fn arity(toks: &[&str], n: usize, line: usize) -> Result<(), ParseError> {
    if toks.len() == n {
        Ok(())
    } else {
        Err(ParseError::new(line, format!("`{}` takes {} fields, got {}", toks[0], n - 1, toks.len() - 1)))
    }
}

fn dash<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn insert_new<K: Ord, V>(map: &mut BTreeMap<K, V>, k: K, v: V, line: usize) -> Result<(), ParseError> {
    if map.insert(k, v).is_some() {
        return Err(ParseError::new(line, "duplicate key"));
    }
    Ok(())
}

/// An artifact with a canonical text block.
pub trait Canonical: Sized {
    const TAG: &'static str;

    fn node(&self) -> NodeId;

    fn write_body(&self, out: &mut String);

    /// Handles one body line; `Ok(false)` when the word is not recognized.
    fn read_line(&mut self, toks: &[&str], line: usize, lines: &mut Lines<'_>) -> Result<bool, ParseError>;

    fn empty(node: NodeId) -> Self;

    fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", Self::TAG, self.node());
        self.write_body(&mut out);
        out.push_str("end\n");
        out
    }

    fn read(lines: &mut Lines<'_>) -> Result<Self, ParseError> {
        let (line, toks) = lines.next_line()?;
        if toks[0] != Self::TAG {
            return Err(ParseError::new(line, format!("expected `{}`, found `{}`", Self::TAG, toks[0])));
        }
        arity(&toks, 2, line)?;
        let mut x = Self::empty(id(&toks, 1, line)?);
        loop {
            let (line, toks) = lines.next_line()?;
            if toks[0] == "end" {
                arity(&toks, 1, line)?;
                return Ok(x);
            }
            if !x.read_line(&toks, line, lines)? {
                return Err(ParseError::new(line, format!("unknown entry `{}` in {}", toks[0], Self::TAG)));
            }
        }
    }

    fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = Lines::new(text);
        let x = Self::read(&mut lines)?;
        if !lines.is_done() {
            return Err(ParseError::new(lines.last + 1, "trailing input"));
        }
        Ok(x)
    }
}

fn write_tz_table(t: &TzTable, out: &mut String) {
    for (l, p) in &t.landmarks {
        writeln!(out, "landmark {l} {}", dash(p.map(|p| p.0))).unwrap();
    }
    for (u, p) in &t.cluster {
        writeln!(out, "cluster {u} {}", dash(p.map(|p| p.0))).unwrap();
    }
}

fn read_tz_table(t: &mut TzTable, toks: &[&str], line: usize) -> Result<bool, ParseError> {
    let map = match toks[0] {
        "landmark" => &mut t.landmarks,
        "cluster" => &mut t.cluster,
        _ => return Ok(false),
    };
    arity(toks, 3, line)?;
    insert_new(map, id(toks, 1, line)?, port(toks, 2, line)?, line)?;
    Ok(true)
}

impl Canonical for TzTable {
    const TAG: &'static str = "tz-table";

    fn node(&self) -> NodeId {
        self.node
    }

    fn write_body(&self, out: &mut String) {
        write_tz_table(self, out);
    }

    fn read_line(&mut self, toks: &[&str], line: usize, _: &mut Lines<'_>) -> Result<bool, ParseError> {
        read_tz_table(self, toks, line)
    }

    fn empty(node: NodeId) -> Self {
        TzTable { node, landmarks: BTreeMap::new(), cluster: BTreeMap::new() }
    }
}

fn write_tz_cert(c: &TzCertificate, out: &mut String) {
    for (l, d) in &c.landmark_dist {
        writeln!(out, "landmark-dist {l} {d}").unwrap();
    }
    for (u, e) in &c.cluster {
        writeln!(out, "cluster {u} {} {} {}", e.dist, e.landmark, e.landmark_dist).unwrap();
    }
}

fn read_tz_cert(c: &mut TzCertificate, toks: &[&str], line: usize) -> Result<bool, ParseError> {
    match toks[0] {
        "landmark-dist" => {
            arity(toks, 3, line)?;
            insert_new(&mut c.landmark_dist, id(toks, 1, line)?, field(toks, 2, line)?, line)?;
        }
        "cluster" => {
            arity(toks, 5, line)?;
            let e = ClusterCert {
                dist: field(toks, 2, line)?,
                landmark: id(toks, 3, line)?,
                landmark_dist: field(toks, 4, line)?,
            };
            insert_new(&mut c.cluster, id(toks, 1, line)?, e, line)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

impl Canonical for TzCertificate {
    const TAG: &'static str = "tz-cert";

    fn node(&self) -> NodeId {
        self.node
    }

    fn write_body(&self, out: &mut String) {
        write_tz_cert(self, out);
    }

    fn read_line(&mut self, toks: &[&str], line: usize, _: &mut Lines<'_>) -> Result<bool, ParseError> {
        read_tz_cert(self, toks, line)
    }

    fn empty(node: NodeId) -> Self {
        TzCertificate { node, landmark_dist: BTreeMap::new(), cluster: BTreeMap::new() }
    }
}

impl Canonical for NiTable {
    const TAG: &'static str = "ni-table";

    fn node(&self) -> NodeId {
        self.tz.node
    }

    fn write_body(&self, out: &mut String) {
        write_tz_table(&self.tz, out);
        for (u, p) in &self.ball {
            writeln!(out, "ball {u} {}", dash(p.map(|p| p.0))).unwrap();
        }
        writeln!(out, "hash {} {} {}", self.hash.a, self.hash.b, self.hash.colors).unwrap();
        for d in &self.dir {
            writeln!(out, "dir {} {} {}", d.node, d.landmark, d.port.0).unwrap();
        }
    }

    fn read_line(&mut self, toks: &[&str], line: usize, _: &mut Lines<'_>) -> Result<bool, ParseError> {
        if read_tz_table(&mut self.tz, toks, line)? {
            return Ok(true);
        }
        match toks[0] {
            "ball" => {
                arity(toks, 3, line)?;
                insert_new(&mut self.ball, id(toks, 1, line)?, port(toks, 2, line)?, line)?;
            }
            "hash" => {
                arity(toks, 4, line)?;
                self.hash = ColorHash { a: field(toks, 1, line)?, b: field(toks, 2, line)?, colors: field(toks, 3, line)? };
            }
            "dir" => {
                arity(toks, 4, line)?;
                self.dir.push(DirTriple {
                    node: id(toks, 1, line)?,
                    landmark: id(toks, 2, line)?,
                    port: Port(field(toks, 3, line)?),
                });
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn empty(node: NodeId) -> Self {
        NiTable {
            tz: TzTable::empty(node),
            ball: BTreeMap::new(),
            hash: ColorHash { a: 0, b: 0, colors: 0 },
            dir: Vec::new(),
        }
    }
}

fn bits_hex(b: &BitString) -> String {
    if b.is_empty() {
        "-".to_string()
    } else {
        hex::encode(b.to_bytes())
    }
}

fn hex_bits(tok: &str, len: usize, line: usize) -> Result<BitString, ParseError> {
    if tok == "-" {
        return if len == 0 { Ok(BitString::new()) } else { Err(ParseError::new(line, "empty function")) };
    }
    let bytes = hex::decode(tok).map_err(|_| ParseError::new(line, "bad hex"))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(ParseError::new(line, format!("function is not {len} bits")));
    }
    BitString::from_bytes(&bytes, len).ok_or_else(|| ParseError::new(line, "short function"))
}

impl Canonical for NiCertificate {
    const TAG: &'static str = "ni-cert";

    fn node(&self) -> NodeId {
        self.tz.node
    }

    fn write_body(&self, out: &mut String) {
        write_tz_cert(&self.tz, out);
        for (u, d) in &self.ball_dist {
            writeln!(out, "ball-dist {u} {d}").unwrap();
        }
        writeln!(out, "family {} {}", self.family.r, self.family.k()).unwrap();
        for f in &self.family.functions {
            writeln!(out, "f {}", bits_hex(f)).unwrap();
        }
        let bits: String = self.matrix.values.iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(out, "matrix {} {} {}", self.matrix.k, self.matrix.colors, if bits.is_empty() { "-" } else { &bits }).unwrap();
    }

    fn read_line(&mut self, toks: &[&str], line: usize, lines: &mut Lines<'_>) -> Result<bool, ParseError> {
        if read_tz_cert(&mut self.tz, toks, line)? {
            return Ok(true);
        }
        match toks[0] {
            "ball-dist" => {
                arity(toks, 3, line)?;
                insert_new(&mut self.ball_dist, id(toks, 1, line)?, field(toks, 2, line)?, line)?;
            }
            "family" => {
                arity(toks, 3, line)?;
                let r: usize = field(toks, 1, line)?;
                let k: usize = field(toks, 2, line)?;
                let mut functions = Vec::with_capacity(k);
                for _ in 0..k {
                    let (line, toks) = lines.next_line()?;
                    if toks[0] != "f" {
                        return Err(ParseError::new(line, "expected `f <hex>`"));
                    }
                    arity(&toks, 2, line)?;
                    functions.push(hex_bits(toks[1], r, line)?);
                }
                self.family = Arc::new(HashFamily { r, functions });
            }
            "matrix" => {
                arity(toks, 4, line)?;
                let values = match toks[3] {
                    "-" => Vec::new(),
                    s => s
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(ParseError::new(line, "matrix bits must be 0 or 1")),
                        })
                        .collect::<Result<_, _>>()?,
                };
                self.matrix = Arc::new(FMatrix { k: field(toks, 1, line)?, colors: field(toks, 2, line)?, values });
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn empty(node: NodeId) -> Self {
        NiCertificate {
            tz: TzCertificate::empty(node),
            ball_dist: BTreeMap::new(),
            family: Arc::new(HashFamily { r: 0, functions: Vec::new() }),
            matrix: Arc::new(FMatrix { k: 0, colors: 0, values: Vec::new() }),
        }
    }
}

impl Canonical for HkTable {
    const TAG: &'static str = "hk-table";

    fn node(&self) -> NodeId {
        self.node
    }

    fn write_body(&self, out: &mut String) {
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        writeln!(out, "levels {}", levels.join(" ")).unwrap();
        for (u, l) in &self.bunch {
            writeln!(out, "bunch {u} {l}").unwrap();
        }
        for (u, p) in &self.cluster {
            writeln!(out, "cluster {u} {}", dash(p.map(|p| p.0))).unwrap();
        }
        for t in self.trees.values() {
            writeln!(out, "tree {} {} {} {}", t.root, t.label, t.end, dash(t.parent.map(|p| p.0))).unwrap();
            for c in &t.children {
                writeln!(out, "child {} {} {}", c.start, c.end, c.port.0).unwrap();
            }
        }
    }

    fn read_line(&mut self, toks: &[&str], line: usize, lines: &mut Lines<'_>) -> Result<bool, ParseError> {
        match toks[0] {
            "levels" => {
                self.levels = (1..toks.len()).map(|i| id(toks, i, line)).collect::<Result<_, _>>()?;
            }
            "bunch" => {
                arity(toks, 3, line)?;
                insert_new(&mut self.bunch, id(toks, 1, line)?, field(toks, 2, line)?, line)?;
            }
            "cluster" => {
                arity(toks, 3, line)?;
                insert_new(&mut self.cluster, id(toks, 1, line)?, port(toks, 2, line)?, line)?;
            }
            "tree" => {
                arity(toks, 5, line)?;
                let mut t = TreeTable {
                    root: id(toks, 1, line)?,
                    label: field(toks, 2, line)?,
                    end: field(toks, 3, line)?,
                    parent: port(toks, 4, line)?,
                    children: Vec::new(),
                };
                while lines.peek_word() == Some("child") {
                    let (line, toks) = lines.next_line()?;
                    arity(&toks, 4, line)?;
                    t.children.push(TreeChild {
                        start: field(&toks, 1, line)?,
                        end: field(&toks, 2, line)?,
                        port: Port(field(&toks, 3, line)?),
                    });
                }
                insert_new(&mut self.trees, t.root, t, line)?;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn empty(node: NodeId) -> Self {
        HkTable {
            node,
            levels: Vec::new(),
            bunch: BTreeMap::new(),
            cluster: BTreeMap::new(),
            trees: BTreeMap::new(),
        }
    }
}

impl Canonical for HkCertificate {
    const TAG: &'static str = "hk-cert";

    fn node(&self) -> NodeId {
        self.node
    }

    fn write_body(&self, out: &mut String) {
        let d: Vec<String> = self.level_dist.iter().map(u64::to_string).collect();
        writeln!(out, "level-dist {}", d.join(" ")).unwrap();
        for (u, d) in &self.bunch_dist {
            writeln!(out, "bunch-dist {u} {d}").unwrap();
        }
        for (u, e) in &self.cluster {
            writeln!(out, "cluster {u} {} {}", e.dist, dash(e.bound)).unwrap();
        }
    }

    fn read_line(&mut self, toks: &[&str], line: usize, _: &mut Lines<'_>) -> Result<bool, ParseError> {
        match toks[0] {
            "level-dist" => {
                self.level_dist = (1..toks.len()).map(|i| field(toks, i, line)).collect::<Result<_, _>>()?;
            }
            "bunch-dist" => {
                arity(toks, 3, line)?;
                insert_new(&mut self.bunch_dist, id(toks, 1, line)?, field(toks, 2, line)?, line)?;
            }
            "cluster" => {
                arity(toks, 4, line)?;
                let e = HkClusterCert { dist: field(toks, 2, line)?, bound: opt(toks, 3, line)? };
                insert_new(&mut self.cluster, id(toks, 1, line)?, e, line)?;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn empty(node: NodeId) -> Self {
        HkCertificate { node, level_dist: Vec::new(), bunch_dist: BTreeMap::new(), cluster: BTreeMap::new() }
    }
}

/// Scheme-specific parameters a bundle's verifier needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BundleKind {
    Tz,
    Ni(NiParams),
    Hk { k: u32 },
}

impl BundleKind {
    pub fn header(&self, n: usize) -> String {
        match self {
            BundleKind::Tz => format!("bundle tz {n}\n"),
            BundleKind::Ni(p) => format!("bundle ni {n} {} {} {}\n", p.ball_factor, p.color_balance, p.beta),
            BundleKind::Hk { k } => format!("bundle hk {n} {k}\n"),
        }
    }
}

/// Tables and certificates of every node, in id order.
pub fn write_bundle<T: Canonical, C: Canonical>(kind: BundleKind, tables: &[T], certs: &[C]) -> String {
    let mut out = kind.header(tables.len());
    for (t, c) in tables.iter().zip(certs) {
        out.push_str(&t.to_text());
        out.push_str(&c.to_text());
    }
    out
}

fn read_pairs<T: Canonical, C: Canonical>(lines: &mut Lines<'_>, n: usize) -> Result<(Vec<T>, Vec<C>), ParseError> {
    let mut tables = Vec::with_capacity(n);
    let mut certs = Vec::with_capacity(n);
    for _ in 0..n {
        tables.push(T::read(lines)?);
        certs.push(C::read(lines)?);
    }
    if !lines.is_done() {
        return Err(ParseError::new(lines.last + 1, "trailing input after the last node"));
    }
    Ok((tables, certs))
}

/// Reads a bundle and runs the matching verifier at every node of `g`.
pub fn verify_bundle(g: &WeightedGraph, text: &str) -> Result<Vec<Verdict>, Error> {
    let mut lines = Lines::new(text);
    let (line, toks) = lines.next_line()?;
    if toks[0] != "bundle" || toks.len() < 3 {
        return Err(ParseError::new(line, "expected `bundle <scheme> <n> ...`").into());
    }
    let n: usize = field(&toks, 2, line)?;
    if n != g.n() {
        return Err(ParseError::new(line, format!("bundle has {n} nodes, graph has {}", g.n())).into());
    }
    let check_ids = |ids: Vec<NodeId>| -> Result<(), Error> {
        if ids != g.ids() {
            return Err(Error::Usage("bundle nodes do not match the graph".into()));
        }
        Ok(())
    };
    Ok(match toks[1] {
        "tz" => {
            arity(&toks, 3, line)?;
            let (tables, certs) = read_pairs::<TzTable, TzCertificate>(&mut lines, n)?;
            check_ids(tables.iter().map(|t| t.node).collect())?;
            tz_verify(g, &tables, &certs)
        }
        "ni" => {
            arity(&toks, 6, line)?;
            let params = NiParams {
                ball_factor: field(&toks, 3, line)?,
                color_balance: field(&toks, 4, line)?,
                beta: field(&toks, 5, line)?,
            };
            let (tables, mut certs) = read_pairs::<NiTable, NiCertificate>(&mut lines, n)?;
            check_ids(tables.iter().map(|t| t.node()).collect())?;
            share_families(&mut certs);
            ni_verify(g, &tables, &certs, &params)
        }
        "hk" => {
            arity(&toks, 4, line)?;
            let k: u32 = field(&toks, 3, line)?;
            let (tables, certs) = read_pairs::<HkTable, HkCertificate>(&mut lines, n)?;
            check_ids(tables.iter().map(|t| t.node).collect())?;
            hk_verify(g, &tables, &certs, k)
        }
        other => return Err(ParseError::new(line, format!("unknown scheme `{other}`")).into()),
    })
}

/// Points equal families and matrices at one allocation.
fn share_families(certs: &mut [NiCertificate]) {
    for i in 1..certs.len() {
        if certs[i].family == certs[i - 1].family {
            certs[i].family = certs[i - 1].family.clone();
        }
        if certs[i].matrix == certs[i - 1].matrix {
            certs[i].matrix = certs[i - 1].matrix.clone();
        }
    }
}
