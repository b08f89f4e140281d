//! Labelled directed multigraphs: the trellis that defines a quantizer.
//!
//! Vertices, edges and alphabet symbols are stored in the order they were
//! supplied. Edge order matters: it is the tie-breaking order used by the
//! Viterbi traceback.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::scc;

/// Index into a graph's alphabet.
pub type Symbol = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: Vec<String>,
    alphabet: Vec<String>,
    edges: Vec<Edge>,
    /// Incoming edge indices per vertex, ascending.
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

/// Structural verdicts for a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub strongly_connected: bool,
    /// Only meaningful when `strongly_connected` holds; `false` otherwise.
    pub aperiodic: bool,
    pub min_out_degree: usize,
    pub uniform_out_degree: Option<usize>,
}

impl ValidationReport {
    pub fn is_primitive(&self) -> bool {
        self.strongly_connected && self.aperiodic
    }
}

/// Coding rate of a graph with uniform out-degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub out_degree: usize,
    /// `Some(R)` when the out-degree is `2^R`.
    pub bits: Option<u32>,
}

impl Rate {
    pub fn is_integer(&self) -> bool {
        self.bits.is_some()
    }

    pub fn as_f64(&self) -> f64 {
        match self.bits {
            Some(b) => f64::from(b),
            None => (self.out_degree as f64).log2(),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bits {
            Some(b) => write!(f, "{b}"),
            None => write!(f, "log2({})", self.out_degree),
        }
    }
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.contains('#') && !s.chars().any(char::is_whitespace)
}

impl LabeledGraph {
    /// Builds a graph from index-based edges, checking every structural invariant.
    pub fn new(vertices: Vec<String>, alphabet: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        check_unique("vertex", &vertices)?;
        check_unique("symbol", &alphabet)?;
        for name in vertices.iter().chain(alphabet.iter()) {
            if !valid_token(name) {
                return Err(Error::InvalidGraph(format!("invalid identifier `{name}`")));
            }
        }
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let n = vertices.len();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidGraph(format!("edge {i} references a missing vertex")));
            }
            if e.label >= alphabet.len() {
                return Err(Error::InvalidGraph(format!("edge {i} has label index {}", e.label)));
            }
            outgoing[e.from].push(i);
            incoming[e.to].push(i);
        }
        if let Some(v) = outgoing.iter().position(Vec::is_empty) {
            return Err(Error::NoOutEdge {
                vertex: vertices[v].clone(),
            });
        }
        Ok(Self {
            vertices,
            alphabet,
            edges,
            incoming,
            outgoing,
        })
    }

    /// Builds a graph from `(from, to, label)` names; vertices are declared on
    /// first mention.
    pub fn from_named<S: AsRef<str>>(alphabet: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_owned()).collect();
        check_unique("symbol", &alphabet)?;
        let mut builder = Builder::new(alphabet);
        for (from, to, label) in edges {
            builder.edge(from.as_ref(), to.as_ref(), label.as_ref())?;
        }
        builder.finish()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices entering `v`, in edge order.
    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.alphabet.iter().position(|a| a == name)
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// Maps symbol names to indices, failing on the first unknown one.
    pub fn symbols<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Symbol>> {
        names
            .iter()
            .map(|s| {
                self.symbol(s.as_ref()).ok_or_else(|| Error::UnknownLabel {
                    label: s.as_ref().to_owned(),
                })
            })
            .collect()
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        self.outgoing
            .iter()
            .map(|out| out.iter().map(|&e| self.edges[e].to).collect())
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let adj = self.successors();
        let (comps, _) = scc::tarjan(&adj);
        let strongly_connected = comps.len() == 1;
        let aperiodic = strongly_connected && period(&adj) == 1;
        let degrees: Vec<usize> = self.outgoing.iter().map(Vec::len).collect();
        let min_out_degree = degrees.iter().copied().min().unwrap_or(0);
        let max_out_degree = degrees.iter().copied().max().unwrap_or(0);
        ValidationReport {
            strongly_connected,
            aperiodic,
            min_out_degree,
            uniform_out_degree: (min_out_degree == max_out_degree).then_some(min_out_degree),
        }
    }

    /// Least `k` such that every ordered vertex pair is joined by a path of
    /// length exactly `k`.
    pub fn exact_path_constant(&self) -> Result<u32> {
        let n = self.vertex_count();
        let bound = (n - 1) * (n - 1) + 1;
        let words = n.div_ceil(64);
        let full = BitRow::full(n, words);
        let adj: Vec<BitRow> = self
            .successors()
            .iter()
            .map(|succ| BitRow::from_indices(succ, words))
            .collect();
        // reach[u] = vertices reachable from u by a path of exactly `len` edges
        let mut reach = adj.clone();
        for len in 1..=bound {
            if reach.iter().all(|r| *r == full) {
                return Ok(len as u32);
            }
            reach = reach
                .iter()
                .map(|row| {
                    let mut next = BitRow::empty(words);
                    for w in row.iter() {
                        next.or_assign(&adj[w]);
                    }
                    next
                })
                .collect();
        }
        Err(Error::NotPrimitive { bound })
    }

    pub fn rate(&self) -> Result<Rate> {
        let report = self.validate();
        let degree = report.uniform_out_degree.ok_or_else(|| {
            let max = self.outgoing.iter().map(Vec::len).max().unwrap_or(0);
            Error::NonUniformDegree {
                min: report.min_out_degree,
                max,
            }
        })?;
        Ok(Rate {
            out_degree: degree,
            bits: degree.is_power_of_two().then(|| degree.trailing_zeros()),
        })
    }

    /// Serializes to the line-oriented graph format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("alphabet");
        for a in &self.alphabet {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
        if self.first_mention_order() != self.vertices {
            for v in &self.vertices {
                out.push_str("vertex ");
                out.push_str(v);
                out.push('\n');
            }
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                self.vertices[e.from], self.vertices[e.to], self.alphabet[e.label]
            ));
        }
        out
    }

    fn first_mention_order(&self) -> Vec<String> {
        let mut seen = vec![false; self.vertex_count()];
        let mut order = Vec::with_capacity(self.vertex_count());
        for e in &self.edges {
            for v in [e.from, e.to] {
                if !seen[v] {
                    seen[v] = true;
                    order.push(self.vertices[v].clone());
                }
            }
        }
        order
    }
}

fn check_unique(kind: &'static str, ids: &[String]) -> Result<()> {
    let mut seen = HashMap::new();
    for id in ids {
        if seen.insert(id.as_str(), ()).is_some() {
            return Err(Error::Duplicate {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

/// Period of a strongly connected graph: gcd over edges of the BFS level
/// discrepancy `level[u] + 1 - level[v]`.
fn period(adj: &[Vec<usize>]) -> u64 {
    let n = adj.len();
    let mut level: Vec<Option<u64>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = Some(0);
    queue.push_back(0);
    let mut g = 0u64;
    while let Some(u) = queue.pop_front() {
        let lu = level[u].expect("queued vertices have a level");
        for &v in &adj[u] {
            match level[v] {
                None => {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
                Some(lv) => g = g.gcd(&(lu + 1).abs_diff(lv)),
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn empty(words: usize) -> Self {
        BitRow(vec![0; words])
    }

    fn full(n: usize, words: usize) -> Self {
        let mut row = Self::empty(words);
        for i in 0..n {
            row.0[i / 64] |= 1 << (i % 64);
        }
        row
    }

    fn from_indices(idx: &[usize], words: usize) -> Self {
        let mut row = Self::empty(words);
        for &i in idx {
            row.0[i / 64] |= 1 << (i % 64);
        }
        row
    }

    fn or_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Incremental construction used by the parser and `from_named`.
struct Builder {
    alphabet: Vec<String>,
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
}

impl Builder {
    fn new(alphabet: Vec<String>) -> Self {
        Self {
            alphabet,
            vertices: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn declare(&mut self, v: &str) -> Result<()> {
        if self.index.contains_key(v) {
            return Err(Error::Duplicate {
                kind: "vertex",
                id: v.to_owned(),
            });
        }
        self.vertex(v);
        Ok(())
    }

    fn vertex(&mut self, v: &str) -> usize {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(v.to_owned());
        self.index.insert(v.to_owned(), i);
        i
    }

    fn edge(&mut self, from: &str, to: &str, label: &str) -> Result<()> {
        let label = self
            .alphabet
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_owned(),
            })?;
        let from = self.vertex(from);
        let to = self.vertex(to);
        self.edges.push(Edge { from, to, label });
        Ok(())
    }

    fn finish(self) -> Result<LabeledGraph> {
        LabeledGraph::new(self.vertices, self.alphabet, self.edges)
    }
}

/// Parses the line-oriented graph format.
///
/// ```text
/// # comment
/// alphabet a b c d
/// vertex 000          # optional, fixes vertex order before any edge
/// edge 000 001 b
/// ```
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let mut builder: Option<Builder> = None;
    let mut seen_edge = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let args: Vec<&str> = tokens.collect();
        let syntax = |message: String| Error::Syntax { line, message };
        match (keyword, builder.as_mut()) {
            ("alphabet", None) => {
                if args.is_empty() {
                    return Err(syntax("alphabet line lists no symbols".into()));
                }
                let alphabet: Vec<String> = args.iter().map(|s| s.to_string()).collect();
                check_unique("symbol", &alphabet)?;
                builder = Some(Builder::new(alphabet));
            }
            ("alphabet", Some(_)) => return Err(syntax("alphabet declared twice".into())),
            (_, None) => {
                return Err(syntax(format!(
                    "expected `alphabet` as the first line, found `{keyword}`"
                )))
            }
            ("vertex", Some(b)) => {
                if seen_edge {
                    return Err(syntax("vertex declarations must precede edges".into()));
                }
                if args.len() != 1 {
                    return Err(syntax(format!("`vertex` takes 1 argument, got {}", args.len())));
                }
                b.declare(args[0])?;
            }
            ("edge", Some(b)) => {
                if args.len() != 3 {
                    return Err(syntax(format!("`edge` takes 3 arguments, got {}", args.len())));
                }
                seen_edge = true;
                b.edge(args[0], args[1], args[2])?;
            }
            (other, Some(_)) => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    builder
        .ok_or(Error::Syntax {
            line: text.lines().count().max(1),
            message: "missing `alphabet` line".into(),
        })?
        .finish()
}

/// Binary de Bruijn graph of order `order`: vertices are the `2^order`
/// binary words, edges `(x1..xm) -> (x2..xm w)` in `(vertex, w)` order, the
/// `i`-th edge carrying `labels[i]`. The alphabet is the set of labels in
/// order of first appearance.
pub fn de_bruijn<S: AsRef<str>>(order: u32, labels: &[S]) -> Result<LabeledGraph> {
    if order == 0 || order > 20 {
        return Err(Error::InvalidGraph(format!("de Bruijn order {order} not in 1..=20")));
    }
    let n = 1usize << order;
    let expected = 2 * n;
    if labels.len() != expected {
        return Err(Error::LabelCount {
            order,
            expected,
            actual: labels.len(),
        });
    }
    let mut alphabet: Vec<String> = Vec::new();
    let mut edges = Vec::with_capacity(expected);
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        let sym = match alphabet.iter().position(|a| a == label) {
            Some(s) => s,
            None => {
                alphabet.push(label.to_owned());
                alphabet.len() - 1
            }
        };
        let from = i / 2;
        let to = ((from << 1) | (i % 2)) & (n - 1);
        edges.push(Edge {
            from,
            to,
            label: sym,
        });
    }
    let vertices = (0..n)
        .map(|v| format!("{:0width$b}", v, width = order as usize))
        .collect();
    LabeledGraph::new(vertices, alphabet, edges)
}

/// Edge labels of the order-3 quaternary de Bruijn example, in de Bruijn edge order.
pub const EXAMPLE_DEBRUIJN8_LABELS: [&str; 16] = [
    "a", "b", "b", "a", "c", "d", "d", "c", "b", "a", "a", "b", "d", "c", "c", "d",
];

/// The 8-vertex, 16-edge labelled de Bruijn graph over `{a, b, c, d}`.
pub fn example_debruijn8() -> LabeledGraph {
    de_bruijn(3, &EXAMPLE_DEBRUIJN8_LABELS).expect("builtin labelling is well formed")
}
