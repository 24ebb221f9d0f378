//! Left braces on a [`PrimePowerGroup`]: the star operation, circle
//! operation, λ-maps, circle powers, e-chains, ideals and quotients.
//!
//! Conventions: `a∘b = a + b + a*b` and `λ_a(b) = a∘b - a = b + a*b`, so
//! `λ_a - I` is left star multiplication by `a`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::check::{sweep, CheckMode, ClauseReport, Method, ModeMeta, Report, Witness};
use crate::error::{Error, Result};
use crate::group::{AdditiveMap, GroupElement, PrimePowerGroup};
use crate::lattice::{QuotientMap, Subgroup};
use crate::padic::{binom_reduced, checked_pow, mul_mod};

/// Full star tables are only materialized up to this order.
pub const TABLE_LIMIT: u64 = 4096;
/// Largest carrier on which ideal closures enumerate the whole brace.
pub const CLOSURE_LIMIT: u64 = 20_000;

/// A star operation given by a formula rather than a table.
pub trait StarEvaluator: Send + Sync + fmt::Debug {
    fn star(&self, x: &GroupElement, y: &GroupElement) -> GroupElement;
    fn name(&self) -> String;
}

#[derive(Clone, Debug)]
pub enum StarBackend {
    Trivial,
    /// `a*b = p^s ab` on `Z/p^α`.
    Ring { s: u32, factor: u64 },
    /// `(x,y)*(u,v) = (yv, 0)` on `C_p + C_p`.
    Heisenberg,
    /// Row-major table of element indices, row = left operand.
    Table(Arc<Vec<u32>>),
    /// `λ_a` for every element `a`, in index order.
    LambdaTable(Arc<Vec<AdditiveMap>>),
    Product(Arc<Brace>, Arc<Brace>),
    Custom(Arc<dyn StarEvaluator>),
}

#[derive(Clone, Debug)]
pub struct Brace {
    group: PrimePowerGroup,
    backend: StarBackend,
    validated: bool,
}

impl Brace {
    pub fn trivial(group: &PrimePowerGroup) -> Self {
        Brace { group: group.clone(), backend: StarBackend::Trivial, validated: false }
    }

    pub fn ring(p: u64, alpha: u32, s: u32) -> Result<Self> {
        let group = PrimePowerGroup::new(p, &[alpha])?;
        let factor = if s >= alpha { 0 } else { checked_pow(p, s)? };
        Ok(Brace { group, backend: StarBackend::Ring { s, factor }, validated: false })
    }

    pub fn heisenberg(p: u64) -> Result<Self> {
        let group = PrimePowerGroup::new(p, &[1, 1])?;
        Ok(Brace { group, backend: StarBackend::Heisenberg, validated: false })
    }

    pub fn from_star_table(group: &PrimePowerGroup, table: Vec<u32>) -> Result<Self> {
        let n = group.order();
        if table.len() as u64 != n.saturating_mul(n) {
            return Err(Error::Document(format!(
                "star table has {} entries, expected {}",
                table.len(),
                n.saturating_mul(n)
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| u64::from(t) >= n) {
            return Err(Error::IndexOutOfRange { index: u64::from(bad), order: n });
        }
        Ok(Brace { group: group.clone(), backend: StarBackend::Table(Arc::new(table)), validated: false })
    }

    pub fn from_lambda_table(group: &PrimePowerGroup, maps: Vec<AdditiveMap>) -> Result<Self> {
        if maps.len() as u64 != group.order() {
            return Err(Error::Document(format!(
                "lambda table has {} rows, expected {}",
                maps.len(),
                group.order()
            )));
        }
        Ok(Brace { group: group.clone(), backend: StarBackend::LambdaTable(Arc::new(maps)), validated: false })
    }

    pub fn product(b1: &Brace, b2: &Brace) -> Result<Self> {
        if b1.group.p() != b2.group.p() {
            return Err(Error::MismatchedPrime(b1.group.p(), b2.group.p()));
        }
        let exps: Vec<u32> = b1.group.exponents().iter().chain(b2.group.exponents()).copied().collect();
        let group = PrimePowerGroup::new(b1.group.p(), &exps)?;
        Ok(Brace {
            group,
            backend: StarBackend::Product(Arc::new(b1.clone()), Arc::new(b2.clone())),
            validated: false,
        })
    }

    pub fn custom(group: &PrimePowerGroup, eval: Arc<dyn StarEvaluator>) -> Self {
        Brace { group: group.clone(), backend: StarBackend::Custom(eval), validated: false }
    }

    pub fn group(&self) -> &PrimePowerGroup {
        &self.group
    }

    pub fn p(&self) -> u64 {
        self.group.p()
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    pub fn backend(&self) -> &StarBackend {
        &self.backend
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn kind(&self) -> String {
        match &self.backend {
            StarBackend::Trivial => "trivial".into(),
            StarBackend::Ring { s, .. } => format!("ring(s={s})"),
            StarBackend::Heisenberg => "heisenberg".into(),
            StarBackend::Table(_) => "star_table".into(),
            StarBackend::LambdaTable(_) => "lambda_table".into(),
            StarBackend::Product(a, b) => format!("{} x {}", a.kind(), b.kind()),
            StarBackend::Custom(e) => e.name(),
        }
    }

    pub fn star(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let g = &self.group;
        match &self.backend {
            StarBackend::Trivial => g.zero(),
            StarBackend::Ring { factor, .. } => {
                let m = g.modulus(0);
                let v = mul_mod(mul_mod(x.0[0], y.0[0], m), *factor, m);
                GroupElement(smallvec::smallvec![v])
            }
            StarBackend::Heisenberg => {
                let p = g.p();
                GroupElement(smallvec::smallvec![(x.0[1] * y.0[1]) % p, 0])
            }
            StarBackend::Table(t) => {
                let n = g.order();
                let idx = g.index_of(x) * n + g.index_of(y);
                g.element_at_unchecked(u64::from(t[idx as usize]))
            }
            StarBackend::LambdaTable(maps) => {
                let lam = maps[g.index_of(x) as usize].apply(g, y);
                g.sub(&lam, y)
            }
            StarBackend::Product(b1, b2) => {
                let r = b1.group.rank();
                let (x1, x2) = x.0.split_at(r);
                let (y1, y2) = y.0.split_at(r);
                let s1 = b1.star(&GroupElement::from_slice(x1), &GroupElement::from_slice(y1));
                let s2 = b2.star(&GroupElement::from_slice(x2), &GroupElement::from_slice(y2));
                GroupElement(s1.0.iter().chain(s2.0.iter()).copied().collect())
            }
            StarBackend::Custom(e) => e.star(x, y),
        }
    }

    pub fn circle(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let g = &self.group;
        g.add(&g.add(x, y), &self.star(x, y))
    }

    /// `λ_a(b) = a∘b - a`.
    pub fn lambda(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.group.add(b, &self.star(a, b))
    }

    /// `λ_a` as an additive map, from the images of the generators.
    /// Additivity is certified on every element for tabulable carriers and
    /// on generator pairs otherwise.
    pub fn lambda_of(&self, a: &GroupElement) -> Result<AdditiveMap> {
        let g = &self.group;
        let gens = g.generators();
        let map = AdditiveMap::new(g, gens.iter().map(|x| self.lambda(a, x)).collect())?;
        let bad = if g.order() <= TABLE_LIMIT {
            g.elements().find(|b| map.apply(g, b) != self.lambda(a, b))
        } else {
            let mut probes = Vec::new();
            for (i, x) in gens.iter().enumerate() {
                for y in &gens[i..] {
                    probes.push(g.add(x, y));
                }
            }
            probes.into_iter().find(|b| map.apply(g, b) != self.lambda(a, b))
        };
        match bad {
            None => Ok(map),
            Some(b) => Err(Error::NotABrace {
                reason: "λ is not additive".into(),
                witness: vec![a.to_vec(), b.to_vec()],
            }),
        }
    }

    /// `a^{∘m}` by binary exponentiation.
    pub fn circle_pow(&self, a: &GroupElement, mut m: u64) -> GroupElement {
        let mut acc = self.group.zero();
        let mut base = a.clone();
        while m > 0 {
            if m & 1 == 1 {
                acc = self.circle(&acc, &base);
            }
            m >>= 1;
            if m > 0 {
                base = self.circle(&base, &base);
            }
        }
        acc
    }

    /// The circle inverse, as `a^{∘(|A|-1)}`.
    pub fn circle_inv(&self, a: &GroupElement) -> Result<GroupElement> {
        let inv = self.circle_pow(a, self.order() - 1);
        if self.circle(a, &inv).is_zero() && self.circle(&inv, a).is_zero() {
            Ok(inv)
        } else {
            Err(Error::NotABrace { reason: "element has no circle inverse".into(), witness: vec![a.to_vec()] })
        }
    }

    /// Full star table (row-major indices), for carriers up to
    /// [`TABLE_LIMIT`].
    pub fn star_table(&self) -> Result<Vec<u32>> {
        if let StarBackend::Table(t) = &self.backend {
            return Ok(t.as_ref().clone());
        }
        let n = self.order();
        if n > TABLE_LIMIT {
            return Err(Error::IntractableClosure { order: n, limit: TABLE_LIMIT });
        }
        use rayon::prelude::*;
        let g = &self.group;
        Ok((0..n * n)
            .into_par_iter()
            .map(|k| {
                let x = g.element_at_unchecked(k / n);
                let y = g.element_at_unchecked(k % n);
                g.index_of(&self.star(&x, &y)) as u32
            })
            .collect())
    }

    /// The same brace with a table backend, when small enough.
    pub fn tabulated(&self) -> Result<Brace> {
        Ok(Brace {
            group: self.group.clone(),
            backend: StarBackend::Table(Arc::new(self.star_table()?)),
            validated: self.validated,
        })
    }

    /// Runs [`validate_brace`] and marks the brace validated, or fails with
    /// the first witness.
    pub fn certified(mut self, mode: &CheckMode) -> Result<Brace> {
        let report = validate_brace(&self, mode);
        if let Some(fail) = report.failures().next() {
            return Err(Error::NotABrace {
                reason: format!("{} fails", fail.clause),
                witness: fail.witness.as_ref().map(Witness::coords).unwrap_or_default(),
            });
        }
        self.validated = true;
        Ok(self)
    }

    pub(crate) fn mark_validated(mut self) -> Brace {
        self.validated = true;
        self
    }

    /// `e_1' = a*y, e_{i+1}' = a*e_i'`; with `y = None` the diagonal chain
    /// `e_1 = a, e_{i+1} = a*e_i`.
    pub fn e_chain(&self, a: &GroupElement, y: Option<&GroupElement>, jmax: usize) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(jmax);
        let mut cur = match y {
            Some(y) => self.star(a, y),
            None => a.clone(),
        };
        for _ in 0..jmax {
            let next = self.star(a, &cur);
            out.push(std::mem::replace(&mut cur, next));
        }
        out
    }

    /// `(λ_a - I)^m (y)`, through the additive map.
    pub fn lambda_minus_identity_power(&self, a: &GroupElement, y: &GroupElement, m: usize) -> Result<GroupElement> {
        let n = self.lambda_of(a)?.minus_identity(&self.group);
        let mut cur = y.clone();
        for _ in 0..m {
            cur = n.apply(&self.group, &cur);
        }
        Ok(cur)
    }
}

fn walk_witness(b: &Brace, a: &GroupElement, path: &[usize]) -> Option<Witness> {
    let g = &b.group;
    let mut x = g.zero();
    for &j in path {
        let gen = g.generator(j);
        let lhs = b.lambda(a, &g.add(&x, &gen));
        let rhs = g.add(&b.lambda(a, &x), &b.lambda(a, &gen));
        if lhs != rhs {
            return Some(Witness::new(vec![a.clone(), x, gen]));
        }
        x = g.add(&x, &gen);
    }
    None
}

/// Path of generator steps summing to `b`.
fn path_to(b: &GroupElement) -> Vec<usize> {
    b.coords().iter().enumerate().flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize)).collect()
}

/// Checks the brace axioms. `(A,+)` holds by construction; the identity,
/// distributivity, λ-multiplicativity, associativity and inverse clauses
/// are each swept and reported separately.
pub fn validate_brace(b: &Brace, mode: &CheckMode) -> Report {
    let g = &b.group;
    let n = g.order();
    let beta = g.rank() as u64;
    let nn = u128::from(n);
    let mut report = Report::new("brace-axioms");
    report.push(ClauseReport::structural("additive_group", true, None).note(g.describe()));

    report.push(ClauseReport::from_sweep(
        "identity",
        sweep(&[n], mode, |t| {
            let a = g.element_at_unchecked(t[0]);
            let z = g.zero();
            (!b.star(&z, &a).is_zero() || !b.star(&a, &z).is_zero()).then(|| Witness::new(vec![a]))
        }),
    ));

    // Distributivity: direct triples when cheap, otherwise every λ_a is
    // compared with the additive extension of its generator images.
    let triple = |t: &[u64]| {
        let (a, x, y) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]), g.element_at_unchecked(t[2]));
        let lhs = g.add(&b.circle(&a, &g.add(&x, &y)), &a);
        let rhs = g.add(&b.circle(&a, &x), &b.circle(&a, &y));
        (lhs != rhs).then(|| Witness::new(vec![a, x, y]))
    };
    let linear_meta = mode.resolve(nn * nn * u128::from(beta.max(1)));
    let forced_exhaustive = matches!(mode, CheckMode::Exhaustive);
    let (dist, dist_note) = if nn * nn * nn <= crate::check::EXHAUSTIVE_LIMIT || matches!(mode, CheckMode::Sampled { .. }) {
        (sweep(&[n, n, n], mode, triple), "direct triple sweep")
    } else if linear_meta.method == Method::Exhaustive || forced_exhaustive {
        let (_, w) = sweep(&[n], &CheckMode::Exhaustive, |t| {
            let a = g.element_at_unchecked(t[0]);
            let imgs: Vec<GroupElement> = g.generators().iter().map(|x| b.lambda(&a, x)).collect();
            for (j, img) in imgs.iter().enumerate() {
                if g.order_exponent(img) > g.exponents()[j] {
                    let path = vec![j; g.modulus(j) as usize];
                    return walk_witness(b, &a, &path);
                }
            }
            let map = AdditiveMap::new(g, imgs).expect("orders checked");
            g.elements()
                .find(|x| map.apply(g, x) != b.lambda(&a, x))
                .and_then(|x| walk_witness(b, &a, &path_to(&x)))
        });
        ((ModeMeta::exhaustive(nn * nn), w), "λ_a compared with its additive extension")
    } else {
        (sweep(&[n, n, n], mode, triple), "direct triple sweep")
    };
    let dist_ok = dist.1.is_none();
    let dist_exact = dist.0.method == Method::Exhaustive;
    report.push(ClauseReport::from_sweep("distributivity", dist).note(dist_note));

    // λ_{a∘c} = λ_a λ_c, on generators when λ is known to be additive.
    let gens = g.generators();
    let lam = if dist_ok && dist_exact {
        sweep(&[n, n, beta.max(1)], mode, |t| {
            if gens.is_empty() {
                return None;
            }
            let (a, c) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]));
            let x = &gens[t[2] as usize];
            let lhs = b.lambda(&b.circle(&a, &c), x);
            let rhs = b.lambda(&a, &b.lambda(&c, x));
            (lhs != rhs).then(|| Witness::new(vec![a, c, x.clone()]))
        })
    } else {
        sweep(&[n, n, n], mode, |t| {
            let (a, c, x) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]), g.element_at_unchecked(t[2]));
            let lhs = b.lambda(&b.circle(&a, &c), &x);
            let rhs = b.lambda(&a, &b.lambda(&c, &x));
            (lhs != rhs).then(|| Witness::new(vec![a, c, x]))
        })
    };
    let lam_ok = lam.1.is_none();
    let lam_meta = lam.0;
    report.push(ClauseReport::from_sweep("lambda_multiplicativity", lam));

    // With distributivity, (a∘b)∘c - a∘(b∘c) = λ_{a∘b}(c) - λ_aλ_b(c).
    if dist_ok && lam_ok && dist_exact && lam_meta.method == Method::Exhaustive {
        report.push(
            ClauseReport::from_sweep("associativity", (lam_meta, None))
                .note("follows from distributivity and λ-multiplicativity on generators"),
        );
    } else {
        report.push(ClauseReport::from_sweep(
            "associativity",
            sweep(&[n, n, n], mode, |t| {
                let (x, y, z) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]), g.element_at_unchecked(t[2]));
                (b.circle(&b.circle(&x, &y), &z) != b.circle(&x, &b.circle(&y, &z)))
                    .then(|| Witness::new(vec![x, y, z]))
            }),
        ));
    }

    // a has a circle inverse iff λ_a is a bijection.
    let socle = g.socle();
    if dist_ok {
        report.push(
            ClauseReport::from_sweep(
                "inverses",
                sweep(&[n], mode, |t| {
                    let a = g.element_at_unchecked(t[0]);
                    socle.iter().skip(1).any(|s| b.lambda(&a, s).is_zero()).then(|| Witness::new(vec![a]))
                }),
            )
            .note("λ_a injective on the socle"),
        );
    } else if nn * nn <= crate::check::EXHAUSTIVE_LIMIT {
        report.push(ClauseReport::from_sweep(
            "inverses",
            sweep(&[n], &CheckMode::Exhaustive, |t| {
                let a = g.element_at_unchecked(t[0]);
                (!g.elements().any(|x| b.circle(&a, &x).is_zero())).then(|| Witness::new(vec![a]))
            }),
        ));
    } else {
        report.push(ClauseReport::skipped("inverses", "λ not additive; carrier too large for a direct search"));
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerExpansion {
    pub holds: bool,
    pub power: GroupElement,
    pub power_expansion: GroupElement,
    pub star: GroupElement,
    pub star_expansion: GroupElement,
}

/// Compares `a^{∘j}` with `Σ_{i=1}^{j} C(j,i) e_i(a)` and `a^{∘j}*y` with
/// `Σ_{i=1}^{j} C(j,i) e_i'(a,y)`.
pub fn verify_power_expansion(b: &Brace, a: &GroupElement, y: &GroupElement, j: u64) -> Result<PowerExpansion> {
    let g = b.group();
    let m = g.max_exponent();
    let power = b.circle_pow(a, j);
    let star = b.star(&power, y);
    let diag = b.e_chain(a, None, j as usize);
    let side = b.e_chain(a, Some(y), j as usize);
    let mut pe = g.zero();
    let mut se = g.zero();
    for i in 1..=j {
        let c = binom_reduced(j, i, g.p(), m)?;
        pe = g.add(&pe, &g.scale(&diag[(i - 1) as usize], c));
        se = g.add(&se, &g.scale(&side[(i - 1) as usize], c));
    }
    Ok(PowerExpansion { holds: pe == power && se == star, power, power_expansion: pe, star, star_expansion: se })
}

/// An additive subgroup `I` with `a*i, i*a ∈ I` for all `a ∈ A`, `i ∈ I`.
#[derive(Clone, Debug)]
pub struct Ideal {
    subgroup: Subgroup,
    mode: ModeMeta,
}

impl Ideal {
    /// Checks the ideal property and wraps the subgroup.
    pub fn certify(b: &Brace, subgroup: Subgroup, mode: &CheckMode) -> Result<Ideal> {
        let c = ideal_check(b, &subgroup, mode);
        if let Some(w) = c.witness {
            return Err(Error::NotABrace {
                reason: format!("subgroup is not an ideal ({})", w.trace.join("; ")),
                witness: w.coords(),
            });
        }
        Ok(Ideal { subgroup, mode: c.mode })
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn mode(&self) -> ModeMeta {
        self.mode
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.subgroup.elements()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.subgroup.contains(x)
    }

    pub fn cardinality(&self) -> u64 {
        self.subgroup.cardinality()
    }
}

/// `A*I ⊆ I` on generators of `I` (exact, star is additive on the right)
/// and `I*A ⊆ I` over pairs.
pub fn ideal_check(b: &Brace, s: &Subgroup, mode: &CheckMode) -> ClauseReport {
    let g = b.group();
    let gens = s.generators();
    let left = sweep(&[g.order(), gens.len() as u64], mode, |t| {
        let a = g.element_at_unchecked(t[0]);
        let i = &gens[t[1] as usize];
        let x = b.star(&a, i);
        (!s.contains(&x)).then(|| Witness::traced(vec![a, i.clone()], vec!["a*i outside I".into()]))
    });
    let right = sweep(&[s.cardinality(), g.order()], mode, |t| {
        let i = s.element_at(t[0]);
        let a = g.element_at_unchecked(t[1]);
        let x = b.star(&i, &a);
        (!s.contains(&x)).then(|| Witness::traced(vec![i, a], vec!["i*a outside I".into()]))
    });
    let meta = left.0.merge(right.0);
    ClauseReport::from_sweep("ideal", (meta, left.1.or(right.1)))
}

/// The least ideal containing `seeds`.
pub fn ideal_closure(b: &Brace, seeds: &[GroupElement]) -> Result<Ideal> {
    let g = b.group();
    if g.order() > CLOSURE_LIMIT {
        return Err(Error::IntractableClosure { order: g.order(), limit: CLOSURE_LIMIT });
    }
    let mut s = Subgroup::span(g, seeds);
    loop {
        let mut changed = false;
        for i in s.generators() {
            for a in g.elements() {
                let x = b.star(&a, &i);
                if !s.contains(&x) {
                    s.insert(&x);
                    changed = true;
                }
            }
        }
        for i in s.elements() {
            for a in g.elements() {
                let x = b.star(&i, &a);
                if !s.contains(&x) {
                    s.insert(&x);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let total = u128::from(g.order()) * u128::from(s.cardinality());
    Ok(Ideal { subgroup: s, mode: ModeMeta::exhaustive(total) })
}

#[derive(Debug)]
struct QuotientStar {
    parent: Brace,
    map: QuotientMap,
}

impl StarEvaluator for QuotientStar {
    fn star(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let s = self.parent.star(&self.map.lift(x), &self.map.lift(y));
        self.map.project(&s)
    }

    fn name(&self) -> String {
        format!("quotient of {}", self.parent.kind())
    }
}

/// `A/I` with lexicographically minimal representatives.
#[derive(Clone, Debug)]
pub struct QuotientBrace {
    map: QuotientMap,
    brace: Brace,
    ideal: Ideal,
}

impl QuotientBrace {
    pub fn brace(&self) -> &Brace {
        &self.brace
    }

    pub fn map(&self) -> &QuotientMap {
        &self.map
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn project(&self, x: &GroupElement) -> GroupElement {
        self.map.project(x)
    }

    pub fn representative(&self, y: &GroupElement) -> GroupElement {
        self.map.lift(y)
    }
}

/// Builds `A/I`. Representative independence is checked by shifting either
/// argument by each generator of `I`, which covers all shifts by induction.
pub fn quotient_brace(b: &Brace, ideal: &Ideal, mode: &CheckMode) -> Result<QuotientBrace> {
    let g = b.group();
    let map = QuotientMap::new(ideal.subgroup());
    let gens = ideal.subgroup().generators();
    let (_, w) = sweep(&[g.order(), g.order(), gens.len() as u64, 2], mode, |t| {
        let (x, y) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]));
        let z = &gens[t[2] as usize];
        let base = map.project(&b.star(&x, &y));
        let shifted = if t[3] == 0 {
            map.project(&b.star(&g.add(&x, z), &y))
        } else {
            map.project(&b.star(&x, &g.add(&y, z)))
        };
        (base != shifted).then(|| Witness::new(vec![x, y, z.clone()]))
    });
    if let Some(w) = w {
        return Err(Error::RepresentativeDependence(format!(
            "induced star differs on {:?}",
            w.coords()
        )));
    }
    let target = map.target().clone();
    let eval = Brace::custom(&target, Arc::new(QuotientStar { parent: b.clone(), map: map.clone() }));
    let brace = if target.order() <= TABLE_LIMIT { eval.tabulated()? } else { eval };
    let brace = if b.is_validated() { brace.mark_validated() } else { brace };
    Ok(QuotientBrace { map, brace, ideal: ideal.clone() })
}
