//! Recursive Khaneja-Glaser bases of `su(2^n)`.
//!
//! Seeds at two qubits:
//!
//! ```text
//! M_2 = { ab : a, b in X,Y,Z }       K_2 = { aI, Ia : a in X,Y,Z }       H_2 = { XX, YY, ZZ }
//! ```
//!
//! and for `n > 2`, with `G_{n-1} = M_{n-1} u K_{n-1}`:
//!
//! ```text
//! M_n     = { I..IX, I..IY } u G_{n-1}X u G_{n-1}Y
//! K_{n,0} = G_{n-1}I          K_{n,1} = G_{n-1}Z          K_n = { I..IZ } u K_{n,0} u K_{n,1}
//! H_n     = { I..IX } u ( U_{j=2}^{n-1} H_j I^(n-1-j) ) X
//! F_n     = ( U_{j=2}^{n-1} H_j I^(n-1-j) ) Z
//! ```
//!
//! Every element carries the implicit `i/2` factor of [`PauliWord`].

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::pauli::PauliWord;

const LETTERS: [char; 3] = ['X', 'Y', 'Z'];

/// The six labeled basis sets for one qubit count.
#[derive(Debug, Clone)]
pub struct KGBasis {
    pub n: usize,
    pub m_set: Vec<PauliWord>,
    pub k_set: Vec<PauliWord>,
    pub k0_set: Vec<PauliWord>,
    pub k1_set: Vec<PauliWord>,
    pub h_set: Vec<PauliWord>,
    pub f_set: Vec<PauliWord>,
}

#[derive(Debug, Clone)]
struct LabelSets {
    m: Vec<String>,
    k: Vec<String>,
    k0: Vec<String>,
    k1: Vec<String>,
    h: Vec<String>,
    f: Vec<String>,
}

fn identity_label(len: usize) -> String {
    "I".repeat(len)
}

fn suffixed(set: &[String], suffix: &str) -> Vec<String> {
    set.iter().map(|l| format!("{l}{suffix}")).collect()
}

/// `H_bar_n = U_{j=2}^{n-1} H_j (x) I^(n-1-j)`, as labels of length `n - 1`.
fn h_bar(n: usize, h_by_level: &[Vec<String>]) -> Vec<String> {
    (2..n)
        .flat_map(|j| suffixed(&h_by_level[j], &identity_label(n - 1 - j)))
        .collect()
}

fn label_sets(n: usize) -> LabelSets {
    assert!(n >= 2);
    let mut m: Vec<String> = Vec::new();
    let mut k: Vec<String> = Vec::new();
    for a in LETTERS {
        for b in LETTERS {
            m.push(format!("{a}{b}"));
        }
        k.push(format!("{a}I"));
        k.push(format!("I{a}"));
    }
    // h_by_level[j] = H_j labels
    let mut h_by_level: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    h_by_level[2] = LETTERS.iter().map(|a| format!("{a}{a}")).collect();
    let mut k0 = Vec::new();
    let mut k1 = Vec::new();
    let mut f = Vec::new();

    for level in 3..=n {
        let g: Vec<String> = m.iter().chain(k.iter()).cloned().collect();
        let id = identity_label(level - 1);
        let mut next_m = vec![format!("{id}X"), format!("{id}Y")];
        next_m.extend(suffixed(&g, "X"));
        next_m.extend(suffixed(&g, "Y"));
        k0 = suffixed(&g, "I");
        k1 = suffixed(&g, "Z");
        let mut next_k = vec![format!("{id}Z")];
        next_k.extend(k0.iter().cloned());
        next_k.extend(k1.iter().cloned());

        let bar = h_bar(level, &h_by_level);
        let mut h = vec![format!("{id}X")];
        h.extend(suffixed(&bar, "X"));
        h_by_level[level] = h;
        f = suffixed(&bar, "Z");

        m = next_m;
        k = next_k;
    }
    LabelSets { m, k, k0, k1, h: h_by_level[n].clone(), f }
}

fn words(labels: &[String]) -> Vec<PauliWord> {
    labels.iter().map(|l| PauliWord::new(l).expect("generated labels are valid")).collect()
}

/// Builds the Khaneja-Glaser basis for `n >= 2` qubits.
///
/// At `n = 2` the sets are the seeds; `K_{2,0}`, `K_{2,1}` and `F_2` are empty.
pub fn build_kg_basis(n: usize) -> Result<KGBasis> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidInput(format!("basis needs 2 <= n <= 8 qubits, got {n}")));
    }
    let sets = label_sets(n);
    let basis = KGBasis {
        n,
        m_set: words(&sets.m),
        k_set: words(&sets.k),
        k0_set: words(&sets.k0),
        k1_set: words(&sets.k1),
        h_set: words(&sets.h),
        f_set: words(&sets.f),
    };
    debug_assert!(basis.duplicate_label().is_none());
    Ok(basis)
}

/// Shared, lazily built basis for `n` qubits.
pub fn kg_basis(n: usize) -> Result<Arc<KGBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<KGBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    if let Some(b) = guard.get(&n) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_kg_basis(n)?);
    guard.insert(n, Arc::clone(&built));
    Ok(built)
}

/// Alphabetical order of labels with `I < X < Y < Z`.
pub fn order_cartan_basis(mut words: Vec<PauliWord>) -> Vec<PauliWord> {
    words.sort_by(|a, b| a.label().cmp(b.label()));
    words
}

/// `(i/2) I^(n-1) Z`, the generator that commutes with all of `k_n`.
pub fn z_word(n: usize) -> PauliWord {
    PauliWord::new(&format!("{}Z", identity_label(n - 1))).expect("valid label")
}

/// Named Cartan bases that a factor may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CartanKind {
    H,
    F,
}

impl CartanKind {
    pub fn name(self, level: usize) -> String {
        match self {
            CartanKind::H => format!("H_{level}"),
            CartanKind::F => format!("F_{level}"),
        }
    }

    pub fn parse(name: &str) -> Option<(CartanKind, usize)> {
        let (kind, level) = name.split_once('_')?;
        let level = level.parse().ok()?;
        match kind {
            "H" => Some((CartanKind::H, level)),
            "F" => Some((CartanKind::F, level)),
            _ => None,
        }
    }
}

impl KGBasis {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `H_n` in canonical order.
    pub fn cartan_h(&self) -> Vec<PauliWord> {
        order_cartan_basis(self.h_set.clone())
    }

    /// `F_n` in canonical order.
    pub fn cartan_f(&self) -> Vec<PauliWord> {
        order_cartan_basis(self.f_set.clone())
    }

    pub fn cartan(&self, kind: CartanKind) -> Vec<PauliWord> {
        match kind {
            CartanKind::H => self.cartan_h(),
            CartanKind::F => self.cartan_f(),
        }
    }

    /// `K_{n,1} u { I..IZ }`, the target span of the secondary logarithms.
    pub fn k1_with_z(&self) -> Vec<PauliWord> {
        let mut v = self.k1_set.clone();
        v.push(z_word(self.n));
        v
    }

    /// All of `M_n u K_n`.
    pub fn full(&self) -> Vec<PauliWord> {
        self.m_set.iter().chain(self.k_set.iter()).cloned().collect()
    }

    /// First repeated label across all of `M_n u K_n`, if any.
    pub fn duplicate_label(&self) -> Option<String> {
        let mut seen = HashSet::new();
        self.m_set
            .iter()
            .chain(&self.k_set)
            .find(|w| !seen.insert(w.label().to_owned()))
            .map(|w| w.label().to_owned())
    }

    fn named_sets(&self) -> [(&'static str, &Vec<PauliWord>); 6] {
        [
            ("M", &self.m_set),
            ("K", &self.k_set),
            ("K0", &self.k0_set),
            ("K1", &self.k1_set),
            ("H", &self.h_set),
            ("F", &self.f_set),
        ]
    }

    /// Text listing of every set, one `SET_n LABEL` line per element, in canonical order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (name, set) in self.named_sets() {
            for w in order_cartan_basis(set.clone()) {
                let _ = writeln!(out, "{name}_{} {}", self.n, w.label());
            }
        }
        out
    }
}
