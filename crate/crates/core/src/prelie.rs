//! Pullback sections, the map `f`, the dot product on `p^kA`, and the
//! quotient pre-Lie ring `(A/ann(p^{2k}), +, •)` with its companion `⊙`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brace::{ideal_check, Brace, TABLE_LIMIT};
use crate::check::{chunk_rng, sweep, CheckMode, ClauseReport, ModeMeta, Report, Witness};
use crate::error::{Error, Result};
use crate::filtration::{q_chain, star_power_chain, ENUMERATION_LIMIT};
use crate::group::{GroupElement, PrimePowerGroup};
use crate::lattice::{QuotientMap, Subgroup};
use crate::padic::{checked_pow, EngelUnit};

#[derive(Clone, Debug, Serialize)]
pub struct BuildParams {
    pub p: u64,
    /// Exponent of the group: `p^n A = 0`.
    pub n: u32,
    pub k: u32,
    pub xi: EngelUnit,
    /// `floor((p-1)/4)`.
    pub m1: u32,
    /// `p^{2k}` annihilates `A/ann(p^{2k})`.
    pub degenerate: bool,
}

impl BuildParams {
    /// `k` defaults to the least value with `k(p-1) ≥ n`.
    pub fn new(group: &PrimePowerGroup, k: Option<u32>) -> Result<Self> {
        let p = group.p();
        if p < 5 {
            return Err(Error::InvalidArgument(format!("the pre-Lie construction needs p ≥ 5, got {p}")));
        }
        let n = group.max_exponent();
        let least = n.div_ceil((p - 1) as u32).max(1);
        let k = k.unwrap_or(least);
        if k == 0 || u64::from(k) * (p - 1) < u64::from(n) {
            return Err(Error::InvalidArgument(format!("k = {k} violates k(p-1) ≥ {n}")));
        }
        Ok(BuildParams {
            p,
            n,
            k,
            xi: EngelUnit::new(p, n)?,
            m1: ((p - 1) / 4) as u32,
            degenerate: n.saturating_sub(2 * k) <= 2 * k,
        })
    }

    pub fn xi_pow(&self, e: u64) -> u64 {
        self.xi.power(e)
    }

    pub fn degenerate_notice(&self) -> Option<String> {
        self.degenerate.then(|| {
            format!(
                "degenerate-depth: p^{} annihilates A/ann(p^{}), so identities scaled by p^{} read 0 = 0; use p ≥ 7 for substantive runs",
                2 * self.k,
                2 * self.k,
                2 * self.k
            )
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionPolicy {
    Canonical,
    /// Canonical value plus an element of `ann(p^k)` drawn from
    /// `(seed, index of the argument)`.
    Random { seed: u64 },
}

/// A section `s: p^kA -> A` of multiplication by `p^k`.
#[derive(Clone, Debug)]
pub struct PullbackSection {
    group: PrimePowerGroup,
    k: u32,
    policy: SectionPolicy,
}

impl PullbackSection {
    pub(crate) fn from_parts(group: &PrimePowerGroup, k: u32, policy: SectionPolicy) -> Self {
        PullbackSection { group: group.clone(), k, policy }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn policy(&self) -> SectionPolicy {
        self.policy
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        let g = &self.group;
        let base = g.divide_p_power(x, self.k)?;
        match self.policy {
            SectionPolicy::Canonical => Ok(base),
            SectionPolicy::Random { seed } => {
                let mut rng = chunk_rng(seed, g.index_of(x));
                let shift = GroupElement(
                    g.exponents()
                        .iter()
                        .map(|&a| {
                            let free = a.min(self.k);
                            let r = rng.gen_range(0..checked_pow(g.p(), free).unwrap());
                            r * checked_pow(g.p(), a - free).unwrap()
                        })
                        .collect(),
                );
                Ok(g.add(&base, &shift))
            }
        }
    }
}

/// Builds and certifies `p^k s(a) = a` on `p^kA`.
pub fn make_section(b: &Brace, k: u32, policy: SectionPolicy, check: &CheckMode) -> Result<PullbackSection> {
    if k == 0 {
        return Err(Error::InvalidArgument("section level k must be at least 1".into()));
    }
    let g = b.group();
    let s = PullbackSection { group: g.clone(), k, policy };
    let dom = Subgroup::p_power(g, k);
    let (_, w) = sweep(&[dom.cardinality()], check, |t| {
        let a = dom.element_at(t[0]);
        match s.apply(&a) {
            Ok(x) if g.scale_p(&x, k) == a => None,
            _ => Some(Witness::new(vec![a])),
        }
    });
    if let Some(w) = w {
        return Err(Error::SectionDependence(format!("section fails p^k s(a) = a at {:?}", w.coords())));
    }
    Ok(s)
}

/// `[s(a)] + [s(b)] = [s(a+b)]` and `[m s(a)] = [s(ma)]` in `A/I`.
pub fn verify_section_additivity(s: &PullbackSection, ideal: &Subgroup, check: &CheckMode) -> Result<Report> {
    let g = &s.group;
    let k = s.k;
    if !Subgroup::annihilator(g, k).is_subset_of(ideal) {
        return Err(Error::InvalidArgument(format!("ann(p^{k}) is not contained in the ideal")));
    }
    let dom = Subgroup::p_power(g, k);
    let mut report = Report::new("section-additivity");
    let r = sweep(&[dom.cardinality(), dom.cardinality()], check, |t| {
        let (a, c) = (dom.element_at(t[0]), dom.element_at(t[1]));
        let lhs = g.add(&s.apply(&a).ok()?, &s.apply(&c).ok()?);
        let rhs = s.apply(&g.add(&a, &c)).ok()?;
        (!ideal.contains(&g.sub(&lhs, &rhs))).then(|| Witness::new(vec![a, c]))
    });
    report.push(ClauseReport::from_sweep("sum", r));
    let pk = g.p_pow(k);
    let r = sweep(&[dom.cardinality(), pk + 1], check, |t| {
        let a = dom.element_at(t[0]);
        let m = t[1];
        let lhs = g.scale(&s.apply(&a).ok()?, m);
        let rhs = s.apply(&g.scale(&a, m)).ok()?;
        (!ideal.contains(&g.sub(&lhs, &rhs))).then(|| Witness::traced(vec![a], vec![format!("m = {m}")]))
    });
    report.push(ClauseReport::from_sweep("multiple", r));
    Ok(report)
}

/// `[a] ↦ [s(a^{∘p^k})]` on `A/ann(p^{2k})`, as a table of coset indices.
#[derive(Clone, Debug)]
pub struct FMap {
    map: QuotientMap,
    image: Vec<u32>,
}

impl FMap {
    pub fn quotient(&self) -> &QuotientMap {
        &self.map
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn apply(&self, coset: &GroupElement) -> GroupElement {
        let q = self.map.target();
        q.element_at_unchecked(u64::from(self.image[q.index_of(coset) as usize]))
    }
}

fn f_value(b: &Brace, params: &BuildParams, s: &PullbackSection, a: &GroupElement) -> Result<GroupElement> {
    s.apply(&b.circle_pow(a, b.group().p_pow(params.k)))
}

/// Tabulates `f`; each coset is also evaluated on representatives shifted
/// by the generators of `ann(p^{2k})`.
pub fn f_map(b: &Brace, params: &BuildParams, s: &PullbackSection) -> Result<FMap> {
    let g = b.group();
    let ann = Subgroup::annihilator(g, 2 * params.k);
    let map = QuotientMap::new(&ann);
    let q = map.target().clone();
    let shifts = ann.generators();
    let image = (0..q.order())
        .into_par_iter()
        .map(|i| {
            let a = map.lift(&q.element_at_unchecked(i));
            let v = map.project(&f_value(b, params, s, &a)?);
            for z in &shifts {
                let w = map.project(&f_value(b, params, s, &g.add(&a, z))?);
                if w != v {
                    return Err(Error::RepresentativeDependence(format!(
                        "f differs on {a} and {}",
                        g.add(&a, z)
                    )));
                }
            }
            Ok(q.index_of(&v) as u32)
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(FMap { map, image })
}

/// `{a^{∘p^i} : a ∈ A} = p^iA`, by enumerating `A`.
pub fn power_image_equals(b: &Brace, i: u32) -> Result<bool> {
    let g = b.group();
    if g.order() > ENUMERATION_LIMIT {
        return Err(Error::IntractableClosure { order: g.order(), limit: ENUMERATION_LIMIT });
    }
    let target = Subgroup::p_power(g, i);
    let e = g.p_pow(i);
    let imgs: Vec<GroupElement> = (0..g.order()).into_par_iter().map(|t| b.circle_pow(&g.element_at_unchecked(t), e)).collect();
    if !imgs.iter().all(|x| target.contains(x)) {
        return Ok(false);
    }
    let mut seen = vec![false; g.order() as usize];
    let mut distinct = 0u64;
    for x in &imgs {
        let i = g.index_of(x) as usize;
        if !std::mem::replace(&mut seen[i], true) {
            distinct += 1;
        }
    }
    Ok(distinct == target.cardinality())
}

pub fn verify_f_injective(b: &Brace, params: &BuildParams, s: &PullbackSection) -> Result<Report> {
    let mut report = Report::new("f-map");
    let f = match f_map(b, params, s) {
        Ok(f) => {
            report.push(ClauseReport::structural("well_defined", true, None));
            f
        }
        Err(Error::RepresentativeDependence(msg)) => {
            report.push(ClauseReport::structural("well_defined", false, None).note(msg));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let n = f.image.len();
    let mut seen = vec![false; n];
    let mut clash = None;
    for (i, &v) in f.image.iter().enumerate() {
        if std::mem::replace(&mut seen[v as usize], true) && clash.is_none() {
            clash = Some(i);
        }
    }
    let q = f.map.target();
    report.push(
        ClauseReport::from_sweep(
            "injective",
            (
                ModeMeta::exhaustive(n as u128),
                clash.map(|i| Witness::new(vec![q.element_at_unchecked(i as u64)])),
            ),
        )
        .note(format!("{n} cosets")),
    );
    let ok = power_image_equals(b, params.k)?;
    report.push(ClauseReport::structural("power_image", ok, None).note(format!("{{a^(p^{})}} = p^{}A", params.k, params.k)));
    Ok(report)
}

/// `x·y = Σ_{i=0}^{p-2} ξ^{p-1-i} ((ξ^i x) * y)` for `x ∈ p^kA`.
pub fn dot_product(b: &Brace, params: &BuildParams, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
    let g = b.group();
    if !g.in_p_power(x, params.k) {
        return Err(Error::OutsidePowerSubgroup { k: params.k });
    }
    Ok(dot_unchecked(b, params, x, y))
}

pub(crate) fn dot_unchecked(b: &Brace, params: &BuildParams, x: &GroupElement, y: &GroupElement) -> GroupElement {
    let g = b.group();
    let p = params.p;
    let mut acc = g.zero();
    for i in 0..p - 1 {
        let xi_x = g.scale(x, params.xi_pow(i));
        let term = g.scale(&b.star(&xi_x, y), params.xi_pow(p - 1 - i));
        acc = g.add(&acc, &term);
    }
    acc
}

/// Hypotheses of the quotient construction: `p^iA`, `ann(p^i)` ideals and
/// `(p^kA)*ann(p^{2k}) ⊆ ann(p^k)`.
pub fn quotient_hypotheses(b: &Brace, k: u32, check: &CheckMode) -> Report {
    let g = b.group();
    let mut report = Report::new("quotient-hypotheses");
    let mut meta: Option<ModeMeta> = None;
    let mut witness = None;
    for i in 0..=g.max_exponent() {
        for s in [Subgroup::p_power(g, i), Subgroup::annihilator(g, i)] {
            let c = ideal_check(b, &s, check);
            meta = Some(meta.map_or(c.mode, |m| m.merge(c.mode)));
            if witness.is_none() {
                witness = c.witness.map(|mut w| {
                    w.trace.insert(0, format!("{:?}", s.tag()));
                    w
                });
            }
        }
    }
    report.push(ClauseReport::from_sweep("ideals", (meta.unwrap_or_else(ModeMeta::structural), witness)));
    let pa = Subgroup::p_power(g, k);
    let gens = Subgroup::annihilator(g, 2 * k).generators();
    let r = sweep(&[pa.cardinality(), gens.len() as u64], check, |t| {
        let x = pa.element_at(t[0]);
        let y = &gens[t[1] as usize];
        (!g.in_annihilator(&b.star(&x, y), k)).then(|| Witness::new(vec![x, y.clone()]))
    });
    report.push(ClauseReport::from_sweep("pk_times_ann_2k", r));
    report
}

/// A bi-additive product given by a formula.
pub trait ProductEvaluator: Send + Sync + fmt::Debug {
    fn product(&self, x: &GroupElement, y: &GroupElement) -> GroupElement;
}

#[derive(Clone, Debug)]
pub enum ProductBackend {
    Table(Arc<Vec<u32>>),
    Eval(Arc<dyn ProductEvaluator>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Quotient,
    Dot,
    External,
    Passage,
}

#[derive(Clone, Debug)]
pub struct PreLieRing {
    carrier: PrimePowerGroup,
    backend: ProductBackend,
    provenance: Provenance,
}

impl PreLieRing {
    pub fn from_table(carrier: &PrimePowerGroup, table: Vec<u32>, provenance: Provenance) -> Result<Self> {
        let n = carrier.order();
        if table.len() as u64 != n.saturating_mul(n) {
            return Err(Error::Document(format!(
                "product table has {} entries, expected {}",
                table.len(),
                n.saturating_mul(n)
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| u64::from(t) >= n) {
            return Err(Error::IndexOutOfRange { index: u64::from(bad), order: n });
        }
        Ok(PreLieRing { carrier: carrier.clone(), backend: ProductBackend::Table(Arc::new(table)), provenance })
    }

    pub fn from_eval(carrier: &PrimePowerGroup, eval: Arc<dyn ProductEvaluator>, provenance: Provenance) -> Self {
        PreLieRing { carrier: carrier.clone(), backend: ProductBackend::Eval(eval), provenance }
    }

    pub fn zero(carrier: &PrimePowerGroup) -> Self {
        let n = carrier.order() as usize;
        PreLieRing {
            carrier: carrier.clone(),
            backend: ProductBackend::Table(Arc::new(vec![0; n * n])),
            provenance: Provenance::External,
        }
    }

    pub fn carrier(&self) -> &PrimePowerGroup {
        &self.carrier
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn product(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        match &self.backend {
            ProductBackend::Table(t) => {
                let c = &self.carrier;
                let idx = c.index_of(x) * c.order() + c.index_of(y);
                c.element_at_unchecked(u64::from(t[idx as usize]))
            }
            ProductBackend::Eval(e) => e.product(x, y),
        }
    }

    /// Row-major index table, for carriers up to the table limit.
    pub fn table(&self) -> Result<Vec<u32>> {
        if let ProductBackend::Table(t) = &self.backend {
            return Ok(t.as_ref().clone());
        }
        let c = &self.carrier;
        let n = c.order();
        if n > TABLE_LIMIT {
            return Err(Error::IntractableClosure { order: n, limit: TABLE_LIMIT });
        }
        Ok((0..n * n)
            .into_par_iter()
            .map(|k| {
                let x = c.element_at_unchecked(k / n);
                let y = c.element_at_unchecked(k % n);
                c.index_of(&self.product(&x, &y)) as u32
            })
            .collect())
    }
}

/// Bi-additivity (generator steps, which is exact) and the pre-Lie
/// identity `(xy)z - x(yz) = (yx)z - y(xz)`.
pub fn verify_prelie_axioms(ring: &PreLieRing, check: &CheckMode) -> Report {
    let c = ring.carrier();
    let n = c.order();
    let gens = c.generators();
    let nb = gens.len() as u64;
    let mut report = Report::new("prelie-axioms");
    let r = sweep(&[n, nb, n], check, |t| {
        let (x, gen, z) = (c.element_at_unchecked(t[0]), &gens[t[1] as usize], c.element_at_unchecked(t[2]));
        let lhs = ring.product(&c.add(&x, gen), &z);
        let rhs = c.add(&ring.product(&x, &z), &ring.product(gen, &z));
        (lhs != rhs).then(|| Witness::new(vec![x, gen.clone(), z]))
    });
    report.push(ClauseReport::from_sweep("left_additivity", r));
    let r = sweep(&[n, n, nb], check, |t| {
        let (x, z, gen) = (c.element_at_unchecked(t[0]), c.element_at_unchecked(t[1]), &gens[t[2] as usize]);
        let lhs = ring.product(&x, &c.add(&z, gen));
        let rhs = c.add(&ring.product(&x, &z), &ring.product(&x, gen));
        (lhs != rhs).then(|| Witness::new(vec![x, z, gen.clone()]))
    });
    report.push(ClauseReport::from_sweep("right_additivity", r));
    let r = sweep(&[n, n, n], check, |t| {
        let (x, y, z) = (c.element_at_unchecked(t[0]), c.element_at_unchecked(t[1]), c.element_at_unchecked(t[2]));
        let assoc = |x: &GroupElement, y: &GroupElement| {
            c.sub(&ring.product(&ring.product(x, y), &z), &ring.product(x, &ring.product(y, &z)))
        };
        (assoc(&x, &y) != assoc(&y, &x)).then(|| Witness::new(vec![x, y, z]))
    });
    report.push(ClauseReport::from_sweep("prelie_identity", r));
    report
}

/// `span{x·s : x ∈ P, s ∈ S}`.
pub fn left_span(ring: &PreLieRing, s: &Subgroup) -> Result<Subgroup> {
    let c = ring.carrier();
    if c.order() > ENUMERATION_LIMIT {
        return Err(Error::IntractableClosure { order: c.order(), limit: ENUMERATION_LIMIT });
    }
    let gens = s.generators();
    let mut out = Subgroup::zero(c);
    for x in c.elements() {
        for y in &gens {
            out.insert(&ring.product(&x, y));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Nilpotency {
    /// Least `m ≥ 2` with `P^m = 0`.
    pub index: usize,
    /// `log_p |P^j|` for `j = 1..index`.
    pub chain: Vec<u32>,
}

impl Nilpotency {
    /// Products with more than `class` factors vanish.
    pub fn class(&self) -> usize {
        self.index - 1
    }
}

/// `P^1 = P`, `P^{j+1} = span(P · P^j)`, until zero.
pub fn left_nilpotency_index(ring: &PreLieRing) -> Result<Nilpotency> {
    let c = ring.carrier();
    let mut cur = Subgroup::whole(c);
    let mut chain = vec![cur.log_order()];
    let limit = c.n() as usize + 2;
    while !cur.is_trivial() || chain.len() < 2 {
        if chain.len() > limit {
            return Err(Error::InvalidArgument("product is not left nilpotent".into()));
        }
        cur = left_span(ring, &cur)?;
        chain.push(cur.log_order());
    }
    Ok(Nilpotency { index: chain.len(), chain })
}

/// The quotient ring `Q = A/ann(p^{2k})` with tables for `⊙` and `•`.
#[derive(Clone, Debug)]
pub struct QuotientPreLie {
    params: BuildParams,
    map: QuotientMap,
    odot: Arc<Vec<u32>>,
    bullet: Arc<Vec<u32>>,
    notices: Vec<String>,
}

/// `[x]⊙[y] = [s((p^k x) * y)]` over all coset pairs.
pub fn odot_table(b: &Brace, params: &BuildParams, map: &QuotientMap, s: &PullbackSection) -> Result<Vec<u32>> {
    let g = b.group();
    let q = map.target();
    let n = q.order();
    let lifts: Vec<GroupElement> = (0..n).map(|i| map.lift(&q.element_at_unchecked(i))).collect();
    let rows: Vec<Vec<u32>> = lifts
        .par_iter()
        .map(|x| {
            let px = g.scale_p(x, params.k);
            lifts
                .iter()
                .map(|y| Ok(q.index_of(&map.project(&s.apply(&b.star(&px, y))?)) as u32))
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// `[x]•[y] = Σ_{i=0}^{p-2} ξ^{p-1-i} [ξ^i x]⊙[y]`.
pub fn bullet_from_odot(params: &BuildParams, q: &PrimePowerGroup, odot: &[u32]) -> Vec<u32> {
    let n = q.order();
    let p = params.p;
    (0..n)
        .into_par_iter()
        .flat_map_iter(|xi| {
            let x = q.element_at_unchecked(xi);
            let rows: Vec<usize> = (0..p - 1).map(|i| q.index_of(&q.scale(&x, params.xi_pow(i))) as usize).collect();
            (0..n).map(move |yi| {
                let mut acc = q.zero();
                for (i, &r) in rows.iter().enumerate() {
                    let v = q.element_at_unchecked(u64::from(odot[r * n as usize + yi as usize]));
                    acc = q.add(&acc, &q.scale(&v, params.xi_pow(p - 1 - i as u64)));
                }
                q.index_of(&acc) as u32
            })
        })
        .collect()
}

/// Builds `⊙` and `•` on `A/ann(p^{2k})`, after checking the hypotheses,
/// representative independence (shifts by generators of `ann(p^{2k})`)
/// and section independence (a seeded random section gives equal tables).
pub fn build_quotient_prelie(b: &Brace, params: &BuildParams, s: &PullbackSection, check: &CheckMode) -> Result<QuotientPreLie> {
    let hyp = quotient_hypotheses(b, params.k, check);
    if let Some(f) = hyp.failures().next() {
        return Err(Error::InvalidArgument(format!(
            "hypothesis {} fails at {:?}",
            f.clause,
            f.witness.as_ref().map(Witness::coords).unwrap_or_default()
        )));
    }
    build_unchecked(b, params, s, check)
}

pub(crate) fn build_unchecked(b: &Brace, params: &BuildParams, s: &PullbackSection, check: &CheckMode) -> Result<QuotientPreLie> {
    let g = b.group();
    let k = params.k;
    let ann = Subgroup::annihilator(g, 2 * k);
    let map = QuotientMap::new(&ann);
    let q = map.target().clone();
    if q.order() > TABLE_LIMIT {
        return Err(Error::IntractableClosure { order: q.order(), limit: TABLE_LIMIT });
    }

    let shifts = ann.generators();
    let (_, w) = sweep(&[g.order(), g.order(), shifts.len() as u64, 2], check, |t| {
        let (x, y) = (g.element_at_unchecked(t[0]), g.element_at_unchecked(t[1]));
        let z = &shifts[t[2] as usize];
        let eval = |x: &GroupElement, y: &GroupElement| -> Option<GroupElement> {
            Some(map.project(&s.apply(&b.star(&g.scale_p(x, k), y)).ok()?))
        };
        let (x2, y2) = if t[3] == 0 { (g.add(&x, z), y.clone()) } else { (x.clone(), g.add(&y, z)) };
        match (eval(&x, &y), eval(&x2, &y2)) {
            (Some(u), Some(v)) if u == v => None,
            _ => Some(Witness::new(vec![x, y, z.clone()])),
        }
    });
    if let Some(w) = w {
        return Err(Error::RepresentativeDependence(format!("⊙ differs under a shift at {:?}", w.coords())));
    }

    let odot = odot_table(b, params, &map, s)?;
    let other = PullbackSection {
        group: g.clone(),
        k,
        policy: match s.policy {
            SectionPolicy::Canonical => SectionPolicy::Random { seed: check.seed() },
            SectionPolicy::Random { .. } => SectionPolicy::Canonical,
        },
    };
    let odot2 = odot_table(b, params, &map, &other)?;
    if let Some(i) = (0..odot.len()).find(|&i| odot[i] != odot2[i]) {
        let n = q.order();
        return Err(Error::SectionDependence(format!(
            "⊙ at ({}, {}) differs between sections",
            q.element_at_unchecked(i as u64 / n),
            q.element_at_unchecked(i as u64 % n)
        )));
    }
    let bullet = bullet_from_odot(params, &q, &odot);
    let mut notices = Vec::new();
    notices.extend(params.degenerate_notice());
    Ok(QuotientPreLie { params: params.clone(), map, odot: Arc::new(odot), bullet: Arc::new(bullet), notices })
}

impl QuotientPreLie {
    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn map(&self) -> &QuotientMap {
        &self.map
    }

    pub fn carrier(&self) -> &PrimePowerGroup {
        self.map.target()
    }

    pub fn notices(&self) -> &[String] {
        &self.notices
    }

    pub fn odot_table(&self) -> &[u32] {
        &self.odot
    }

    pub fn bullet_table(&self) -> &[u32] {
        &self.bullet
    }

    fn lookup(&self, t: &[u32], x: &GroupElement, y: &GroupElement) -> GroupElement {
        let q = self.carrier();
        let i = q.index_of(x) * q.order() + q.index_of(y);
        q.element_at_unchecked(u64::from(t[i as usize]))
    }

    pub fn odot(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.lookup(&self.odot, x, y)
    }

    pub fn bullet(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.lookup(&self.bullet, x, y)
    }

    pub fn ring(&self) -> PreLieRing {
        PreLieRing {
            carrier: self.carrier().clone(),
            backend: ProductBackend::Table(self.bullet.clone()),
            provenance: Provenance::Quotient,
        }
    }
}

/// Dot product on `p^kA`: additivity in both arguments, and
/// `p^{2k}([a]•[b]) = [(p^k a)·(p^k b)]` on `A/ann(p^{2k})`.
pub fn verify_dot_properties(b: &Brace, qp: &QuotientPreLie, check: &CheckMode) -> Report {
    let g = b.group();
    let params = qp.params();
    let k = params.k;
    let pa = Subgroup::p_power(g, k);
    let gens = pa.generators();
    let m = pa.cardinality();
    let mut report = Report::new("dot-product");
    let r = sweep(&[m, gens.len() as u64, g.order()], check, |t| {
        let (x, gen, z) = (pa.element_at(t[0]), &gens[t[1] as usize], g.element_at_unchecked(t[2]));
        let lhs = dot_unchecked(b, params, &g.add(&x, gen), &z);
        let rhs = g.add(&dot_unchecked(b, params, &x, &z), &dot_unchecked(b, params, gen, &z));
        (lhs != rhs).then(|| Witness::new(vec![x, gen.clone(), z]))
    });
    report.push(ClauseReport::from_sweep("left_additivity", r));
    let ag = g.generators();
    let r = sweep(&[m, g.order(), ag.len() as u64], check, |t| {
        let (x, z, gen) = (pa.element_at(t[0]), g.element_at_unchecked(t[1]), &ag[t[2] as usize]);
        let lhs = dot_unchecked(b, params, &x, &g.add(&z, gen));
        let rhs = g.add(&dot_unchecked(b, params, &x, &z), &dot_unchecked(b, params, &x, gen));
        (lhs != rhs).then(|| Witness::new(vec![x, z, gen.clone()]))
    });
    report.push(ClauseReport::from_sweep("right_additivity", r));
    let q = qp.carrier();
    let map = qp.map();
    let r = sweep(&[q.order(), q.order()], check, |t| {
        let (u, v) = (q.element_at_unchecked(t[0]), q.element_at_unchecked(t[1]));
        let lhs = q.scale_p(&qp.bullet(&u, &v), 2 * k);
        let (a, c) = (map.lift(&u), map.lift(&v));
        let rhs = map.project(&dot_unchecked(b, params, &g.scale_p(&a, k), &g.scale_p(&c, k)));
        (lhs != rhs).then(|| Witness::new(vec![u, v]))
    });
    report.push(ClauseReport::from_sweep("scaling_bridge", r));
    report
}

/// `P^c ⊆ pP` whenever `A^c ⊆ pA`, for the least such `c`.
pub fn verify_nilpotency_transfer(b: &Brace, qp: &QuotientPreLie) -> Result<Report> {
    let g = b.group();
    let mut report = Report::new("nilpotency-transfer");
    let chain = star_power_chain(b)?;
    let pa = Subgroup::p_power(g, 1);
    let c = (1..=chain.terms.len() + 1).find(|&j| chain.term(j).is_subset_of(&pa)).unwrap();
    let ring = qp.ring();
    let q = qp.carrier();
    let mut cur = Subgroup::whole(q);
    for _ in 1..c {
        cur = left_span(&ring, &cur)?;
    }
    let ok = cur.is_subset_of(&Subgroup::p_power(q, 1));
    report.push(ClauseReport::structural("transfer", ok, None).note(format!("least c with A^c ⊆ pA is {c}")));
    Ok(report)
}

/// Descent for the quotient ring: hypotheses `A^c ⊆ pA` and
/// `Q_{t,i} ⊆ p·ann(p^i)`, conclusion `P•(…(P•ann(p^i))) ⊆ p·ann(p^i)` in
/// the carrier with the same depth `t`. The two depths are independent.
pub fn check_quotient_descent(b: &Brace, qp: &QuotientPreLie, c: usize, t: u32) -> Result<Report> {
    let g = b.group();
    let mut report = Report::new("quotient-descent");
    let chain = star_power_chain(b)?;
    let hyp1 = chain.term(c.max(1)).is_subset_of(&Subgroup::p_power(g, 1));
    let mut hyp2 = true;
    for i in 1..=g.max_exponent() {
        let qc = q_chain(b, t, i)?;
        if !qc.is_subset_of(&Subgroup::annihilator(g, i).scaled_p(1)) {
            hyp2 = false;
        }
    }
    let ring = qp.ring();
    let q = qp.carrier();
    let mut concl = true;
    for i in 1..=q.max_exponent() {
        let start = Subgroup::annihilator(q, i);
        let mut cur = start.clone();
        for _ in 0..t {
            cur = left_span(&ring, &cur)?;
        }
        if !cur.is_subset_of(&start.scaled_p(1)) {
            concl = false;
        }
    }
    let ok = !(hyp1 && hyp2) || concl;
    report.push(
        ClauseReport::structural("implication", ok, None)
            .note(format!("A^{c} ⊆ pA: {hyp1}; Q_(t={t}) descent: {hyp2}; conclusion: {concl}")),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Verdict;

    fn el(v: &[u64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn ring5() -> Brace {
        Brace::ring(5, 4, 1).unwrap()
    }

    #[test]
    fn params_defaults() {
        let p = BuildParams::new(ring5().group(), None).unwrap();
        assert_eq!((p.k, p.m1), (1, 1));
        assert!(p.degenerate);
        let r7 = PrimePowerGroup::new(7, &[6]).unwrap();
        let p7 = BuildParams::new(&r7, None).unwrap();
        assert!(!p7.degenerate);
        assert!(BuildParams::new(&PrimePowerGroup::new(3, &[2]).unwrap(), None).is_err());
        assert!(BuildParams::new(&PrimePowerGroup::new(5, &[9]).unwrap(), Some(1)).is_err());
    }

    #[test]
    fn sections() {
        let b = ring5();
        let mode = CheckMode::default();
        let s = make_section(&b, 1, SectionPolicy::Canonical, &mode).unwrap();
        assert_eq!(s.apply(&el(&[125])).unwrap(), el(&[25]));
        assert_eq!(s.apply(&el(&[0])).unwrap(), el(&[0]));
        assert!(s.apply(&el(&[3])).is_err());
        let r = make_section(&b, 1, SectionPolicy::Random { seed: 11 }, &mode).unwrap();
        let v = r.apply(&el(&[5])).unwrap().0[0];
        assert!([1, 126, 251, 376, 501].contains(&v));
        let ann = Subgroup::annihilator(b.group(), 2);
        assert!(verify_section_additivity(&r, &ann, &mode).unwrap().passed());
        assert!(verify_section_additivity(&r, &Subgroup::zero(b.group()), &mode).is_err());
    }

    #[test]
    fn f_map_ring() {
        let b = ring5();
        let params = BuildParams::new(b.group(), None).unwrap();
        let s = make_section(&b, 1, SectionPolicy::Canonical, &CheckMode::default()).unwrap();
        let f = f_map(&b, &params, &s).unwrap();
        assert_eq!(f.apply(&el(&[1])), el(&[61 % 25]));
        assert_eq!(f.apply(&el(&[0])), el(&[0]));
        assert!(verify_f_injective(&b, &params, &s).unwrap().passed());
    }

    #[test]
    fn dot_values() {
        let b = ring5();
        let params = BuildParams::new(b.group(), None).unwrap();
        assert_eq!(dot_product(&b, &params, &el(&[5]), &el(&[5])).unwrap(), el(&[500]));
        assert_eq!(dot_product(&b, &params, &el(&[0]), &el(&[7])).unwrap(), el(&[0]));
        assert!(dot_product(&b, &params, &el(&[1]), &el(&[5])).is_err());
    }

    #[test]
    fn quotient_ring_ring5() {
        let b = ring5();
        let params = BuildParams::new(b.group(), None).unwrap();
        let mode = CheckMode::default();
        let s = make_section(&b, 1, SectionPolicy::Canonical, &mode).unwrap();
        let qp = build_quotient_prelie(&b, &params, &s, &mode).unwrap();
        assert_eq!(qp.carrier().order(), 25);
        assert_eq!(qp.odot(&el(&[1]), &el(&[1])), el(&[5]));
        assert_eq!(qp.bullet(&el(&[1]), &el(&[1])), el(&[20]));
        assert!(!qp.notices().is_empty());
        let ring = qp.ring();
        let rep = verify_prelie_axioms(&ring, &mode);
        assert!(rep.passed());
        assert_eq!(rep.clause("prelie_identity").unwrap().mode.method, crate::check::Method::Exhaustive);
        let nil = left_nilpotency_index(&ring).unwrap();
        assert_eq!(nil.index, 3);
        assert!(verify_nilpotency_transfer(&b, &qp).unwrap().passed());
        assert!(check_quotient_descent(&b, &qp, 2, 1).unwrap().passed());
        assert!(verify_dot_properties(&b, &qp, &mode).passed());
    }

    #[test]
    fn zero_product_ring() {
        let c = PrimePowerGroup::new(5, &[2]).unwrap();
        let z = PreLieRing::zero(&c);
        assert_eq!(left_nilpotency_index(&z).unwrap().index, 2);
        assert!(verify_prelie_axioms(&z, &CheckMode::default()).passed());
    }

    #[test]
    fn broken_prelie_is_caught() {
        // x·y = x^2 y on Z/25 is not additive on the left
        let c = PrimePowerGroup::new(5, &[2]).unwrap();
        let t: Vec<u32> = (0..625u64).map(|k| ((k / 25) * (k / 25) * (k % 25) % 25) as u32).collect();
        let r = PreLieRing::from_table(&c, t, Provenance::External).unwrap();
        let rep = verify_prelie_axioms(&r, &CheckMode::default());
        assert_eq!(rep.clause("left_additivity").unwrap().verdict, Verdict::Fail);
    }
}
