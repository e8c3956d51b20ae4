//! Exhaustive and sampled sweeps over preference profiles.
//!
//! A profile is encoded as one permutation index per agent (indices into the
//! lexicographic list of permutations of `0..n`). Canonical enumeration keeps
//! one representative per orbit under object relabeling × agent reordering:
//! the lexicographically smallest sorted code in the orbit. Every property
//! swept here is invariant under both actions, so representatives suffice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{factorial, permutations, Instance};
use crate::lottery::{envy_matrix, Lottery};
use crate::matrix::AssignmentMatrix;
use crate::oracles::{ef_decomposable, minimax_envy, EfDecomposability};
use crate::rules::{probabilistic_serial, random_priority};
use crate::Rational;

/// Largest `n` the profile enumerator accepts.
pub const MAX_ENUMERATION_N: usize = 5;
/// Largest `n` swept exhaustively by the verifiers.
pub const MAX_EXHAUSTIVE_N: usize = 4;

/// Permutation tables for one `n`.
#[derive(Debug, Clone)]
pub struct ProfileCodec {
    n: usize,
    perms: Vec<Vec<usize>>,
    // relabel[g][k] = index of permutation k with objects renamed by perms[g]
    relabel: Vec<Vec<usize>>,
}

impl ProfileCodec {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_ENUMERATION_N).contains(&n) {
            return Err(Error::Resource { what: "profile size", requested: n, limit: MAX_ENUMERATION_N });
        }
        let perms = permutations(n);
        let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect();
        let relabel = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|p| index[&p.iter().map(|&o| g[o]).collect::<Vec<usize>>()])
                    .collect()
            })
            .collect();
        Ok(ProfileCodec { n, perms, relabel })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct preference lists, `n!`.
    pub fn lists(&self) -> usize {
        self.perms.len()
    }

    /// `(n!)^n`.
    pub fn total_profiles(&self) -> u64 {
        (self.lists() as u64).pow(self.n as u32)
    }

    pub fn instance(&self, code: &[usize]) -> Instance {
        Instance::new(code.iter().map(|&k| self.perms[k].clone()).collect()).expect("valid code")
    }

    pub fn code_of(&self, instance: &Instance) -> Vec<usize> {
        instance
            .preferences()
            .iter()
            .map(|p| self.perms.binary_search(p).expect("preference is a permutation"))
            .collect()
    }

    /// Profile number `index` in base `n!`, agent 0 most significant.
    pub fn decode(&self, mut index: u64) -> Vec<usize> {
        let base = self.lists() as u64;
        let mut code = vec![0; self.n];
        for slot in code.iter_mut().rev() {
            *slot = (index % base) as usize;
            index /= base;
        }
        code
    }

    /// Smallest sorted code in the orbit of `code`.
    pub fn canonical(&self, code: &[usize]) -> Vec<usize> {
        self.relabel
            .iter()
            .map(|table| {
                let mut c: Vec<usize> = code.iter().map(|&k| table[k]).collect();
                c.sort_unstable();
                c
            })
            .min()
            .expect("group is nonempty")
    }

    fn is_canonical_sorted(&self, sorted: &[usize]) -> bool {
        let mut buf = vec![0; sorted.len()];
        self.relabel.iter().all(|table| {
            for (b, &k) in buf.iter_mut().zip(sorted) {
                *b = table[k];
            }
            buf.sort_unstable();
            buf.as_slice() >= sorted
        })
    }

    /// Number of ordered profiles in the orbit of `code`.
    pub fn orbit_size(&self, code: &[usize]) -> u64 {
        let multisets: BTreeSet<Vec<usize>> = self
            .relabel
            .iter()
            .map(|table| {
                let mut c: Vec<usize> = code.iter().map(|&k| table[k]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        multisets.iter().map(|m| arrangements(m)).sum()
    }

    /// All canonical representatives, ascending.
    pub fn canonical_codes(&self) -> Vec<Vec<usize>> {
        Multisets::new(self.lists(), self.n).filter(|c| self.is_canonical_sorted(c)).collect()
    }
}

/// Distinct orderings of a sorted multiset.
fn arrangements(sorted: &[usize]) -> u64 {
    let mut total = factorial(sorted.len()) as u64;
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            total /= run;
        } else {
            run = 1;
        }
    }
    total
}

/// Nondecreasing sequences of length `len` over `0..base`.
struct Multisets {
    base: usize,
    next: Option<Vec<usize>>,
}

impl Multisets {
    fn new(base: usize, len: usize) -> Self {
        Multisets { base, next: Some(vec![0; len]) }
    }
}

impl Iterator for Multisets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        while i > 0 && succ[i - 1] == self.base - 1 {
            i -= 1;
        }
        if i > 0 {
            let v = succ[i - 1] + 1;
            for x in &mut succ[i - 1..] {
                *x = v;
            }
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Lazily yields every profile of size `n`, or one representative per
/// symmetry class when `canonicalize` is set.
pub fn enumerate_profiles(n: usize, canonicalize: bool) -> Result<Box<dyn Iterator<Item = Instance> + Send>> {
    let codec = ProfileCodec::new(n)?;
    if canonicalize {
        let iter = Multisets::new(codec.lists(), n)
            .filter({
                let codec = codec.clone();
                move |c| codec.is_canonical_sorted(c)
            })
            .map(move |c| codec.instance(&c));
        Ok(Box::new(iter))
    } else {
        let total = codec.total_profiles();
        Ok(Box::new((0..total).map(move |k| codec.instance(&codec.decode(k)))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchCheck {
    /// The probabilistic serial matrix is EF-decomposable.
    PsEfDecomposable,
    /// The random priority lottery is Dec-EF.
    RpDecEf,
}

impl SearchCheck {
    pub fn name(self) -> &'static str {
        match self {
            SearchCheck::PsEfDecomposable => "ps-ef-decomposable",
            SearchCheck::RpDecEf => "rp-dec-ef",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchOptions {
    pub canonical: bool,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Sample this many uniformly random profiles instead of enumerating.
    pub sample: Option<usize>,
    pub seed: u64,
    /// Also solve the minimax-envy program for every profile.
    pub minimax_summary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub instance: Instance,
    pub matrix: Option<AssignmentMatrix<Rational>>,
    pub property: &'static str,
    pub certificate: String,
}

/// Result of checking one profile.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileOutcome {
    pub failure: Option<Failure>,
    pub minimax: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Canonical,
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub check: String,
    pub n: usize,
    pub mode: SearchMode,
    pub profiles_examined: u64,
    /// Number of canonical classes examined (canonical mode only).
    pub canonical_classes: Option<u64>,
    /// Ordered profiles covered by the examined classes (canonical mode only).
    pub profiles_represented: Option<u64>,
    pub failures: Vec<Failure>,
    /// Histogram of minimax envy values, one count per examined profile.
    pub minimax_histogram: BTreeMap<Rational, u64>,
    pub wall_time: Duration,
}

impl SearchReport {
    pub fn verified(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_minimax(&self) -> Option<&Rational> {
        self.minimax_histogram.keys().next_back()
    }

    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &SearchReport) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check: {}", self.check)?;
        writeln!(f, "n: {}", self.n)?;
        match &self.mode {
            SearchMode::Exhaustive => writeln!(f, "mode: exhaustive")?,
            SearchMode::Canonical => writeln!(f, "mode: canonical")?,
            SearchMode::Sampled { count, seed } => writeln!(f, "mode: sampled ({count} profiles, seed {seed})")?,
        }
        writeln!(f, "profiles: {}", self.profiles_examined)?;
        if let Some(c) = self.canonical_classes {
            writeln!(f, "classes: {c}")?;
        }
        if let Some(r) = self.profiles_represented {
            writeln!(f, "profiles represented: {r}")?;
        }
        writeln!(f, "failures: {} / {}", self.failures.len(), self.profiles_examined)?;
        if let Some(m) = self.max_minimax() {
            writeln!(f, "max minimax envy: {m}")?;
            for (v, c) in &self.minimax_histogram {
                writeln!(f, "minimax {v}: {c}")?;
            }
        }
        for fail in &self.failures {
            let prefs: Vec<String> = fail
                .instance
                .preferences()
                .iter()
                .map(|p| p.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(""))
                .collect();
            writeln!(f, "failure: profile {} property {}: {}", prefs.join(","), fail.property, fail.certificate)?;
        }
        writeln!(f, "wall time: {:.3}s", self.wall_time.as_secs_f64())
    }
}

/// Runs `check` over the profiles selected by `opts`.
pub fn sweep<F>(n: usize, check_name: &str, opts: &SearchOptions, check: F) -> Result<SearchReport>
where
    F: Fn(&Instance) -> Result<ProfileOutcome> + Sync,
{
    let start = Instant::now();
    let codec = ProfileCodec::new(n)?;
    let (codes, mode): (Vec<Vec<usize>>, SearchMode) = match opts.sample {
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let lists = codec.lists();
            let codes = (0..count)
                .map(|_| {
                    let c: Vec<usize> = (0..n).map(|_| rng.gen_range(0..lists)).collect();
                    if opts.canonical {
                        codec.canonical(&c)
                    } else {
                        c
                    }
                })
                .collect();
            (codes, SearchMode::Sampled { count, seed: opts.seed })
        }
        None if opts.canonical => (codec.canonical_codes(), SearchMode::Canonical),
        None => {
            if n > MAX_EXHAUSTIVE_N {
                return Err(Error::Resource { what: "exhaustive sweep size", requested: n, limit: MAX_EXHAUSTIVE_N });
            }
            ((0..codec.total_profiles()).map(|k| codec.decode(k)).collect(), SearchMode::Exhaustive)
        }
    };

    let run = || -> Result<Vec<ProfileOutcome>> {
        codes.par_iter().map(|c| check(&codec.instance(c))).collect()
    };
    let outcomes = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut failures = Vec::new();
    let mut minimax_histogram = BTreeMap::new();
    for o in outcomes {
        if let Some(v) = o.minimax {
            *minimax_histogram.entry(v).or_insert(0) += 1;
        }
        if let Some(f) = o.failure {
            failures.push(f);
        }
    }
    let (canonical_classes, profiles_represented) = match mode {
        SearchMode::Canonical => (
            Some(codes.len() as u64),
            Some(codes.par_iter().map(|c| codec.orbit_size(c)).sum()),
        ),
        _ => (None, None),
    };
    Ok(SearchReport {
        check: check_name.to_string(),
        n,
        mode,
        profiles_examined: codes.len() as u64,
        canonical_classes,
        profiles_represented,
        failures,
        minimax_histogram,
        wall_time: start.elapsed(),
    })
}

fn ps_ef_outcome(instance: &Instance, with_minimax: bool) -> Result<ProfileOutcome> {
    let m: AssignmentMatrix<Rational> = probabilistic_serial(instance);
    let failure = match ef_decomposable(instance, &m)? {
        EfDecomposability::Decomposable(_) => None,
        EfDecomposability::NotDecomposable(y) => Some(Failure {
            instance: instance.clone(),
            matrix: Some(m.clone()),
            property: "ef-decomposable",
            certificate: format!(
                "farkas multipliers [{}]",
                y.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
            ),
        }),
    };
    let minimax = if with_minimax { Some(minimax_envy(instance, &m)?.0) } else { None };
    Ok(ProfileOutcome { failure, minimax })
}

fn rp_outcome(instance: &Instance) -> Result<ProfileOutcome> {
    let l: Lottery<Rational> = random_priority(instance)?;
    let e = envy_matrix(instance, &l)?;
    let failure = e.first_above(&Rational::new(1.into(), 2.into())).map(|(i, k)| Failure {
        instance: instance.clone(),
        matrix: Some(l.matrix()),
        property: "dec-ef",
        certificate: format!("agent {} envies agent {} with probability {}", i + 1, k + 1, e.get(i, k)),
    });
    Ok(ProfileOutcome { failure, minimax: None })
}

fn require_sweepable(n: usize, opts: &SearchOptions) -> Result<()> {
    if opts.sample.is_none() && n > MAX_EXHAUSTIVE_N {
        return Err(Error::Resource { what: "exhaustive sweep size", requested: n, limit: MAX_EXHAUSTIVE_N });
    }
    Ok(())
}

/// Checks that the PS matrix of every selected profile is EF-decomposable.
pub fn verify_ps_ef_decomposable(n: usize, opts: &SearchOptions) -> Result<SearchReport> {
    require_sweepable(n, opts)?;
    let with_minimax = opts.minimax_summary;
    sweep(n, SearchCheck::PsEfDecomposable.name(), opts, |inst| ps_ef_outcome(inst, with_minimax))
}

/// Checks that random priority is Dec-EF on every selected profile.
pub fn verify_rp_dec_ef(n: usize, opts: &SearchOptions) -> Result<SearchReport> {
    require_sweepable(n, opts)?;
    sweep(n, SearchCheck::RpDecEf.name(), opts, rp_outcome)
}

pub fn run_check(check: SearchCheck, n: usize, opts: &SearchOptions) -> Result<SearchReport> {
    match check {
        SearchCheck::PsEfDecomposable => verify_ps_ef_decomposable(n, opts),
        SearchCheck::RpDecEf => verify_rp_dec_ef(n, opts),
    }
}
