//! Subgroup chains of a brace (`p^iA`, `ann(p^i)`, `E_i`, `A^j`, `Q_{t,j}`)
//! and the descent checks built on them.

use serde::Serialize;

use crate::brace::{ideal_check, Brace};
use crate::check::{sweep, CheckMode, ClauseReport, ModeMeta, Report, Verdict, Witness};
use crate::error::{Error, Result};
use crate::group::{GroupElement, PrimePowerGroup};
use crate::lattice::{QuotientMap, Subgroup, SubgroupTag};

/// Largest carrier that chain constructions enumerate.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

fn require_enumerable(b: &Brace) -> Result<()> {
    if b.order() > ENUMERATION_LIMIT {
        return Err(Error::IntractableClosure { order: b.order(), limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

pub fn p_power_subgroup(b: &Brace, i: u32) -> Subgroup {
    Subgroup::p_power(b.group(), i)
}

pub fn annihilator(b: &Brace, i: u32) -> Subgroup {
    Subgroup::annihilator(b.group(), i)
}

/// A subset of the carrier stored as a bitmask over element indices.
#[derive(Clone, Debug)]
pub struct ElementSet {
    group: PrimePowerGroup,
    mask: Vec<bool>,
    len: u64,
}

impl ElementSet {
    fn singleton_zero(group: &PrimePowerGroup) -> Self {
        let mut mask = vec![false; group.order() as usize];
        mask[0] = true;
        ElementSet { group: group.clone(), mask, len: 1 }
    }

    fn insert(&mut self, x: &GroupElement) -> bool {
        let i = self.group.index_of(x) as usize;
        if self.mask[i] {
            return false;
        }
        self.mask[i] = true;
        self.len += 1;
        true
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.mask[self.group.index_of(x) as usize]
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn members(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.group.element_at_unchecked(i as u64))
    }

    /// Set equality with an additive subgroup, by cardinality and inclusion.
    pub fn equals_subgroup(&self, s: &Subgroup) -> bool {
        self.len == s.cardinality() && self.members().all(|x| s.contains(&x))
    }
}

/// The subgroup of `(A,∘)` generated by `candidates`.
pub fn circle_closure<I>(b: &Brace, candidates: I) -> ElementSet
where
    I: IntoIterator<Item = GroupElement>,
{
    let mut set = ElementSet::singleton_zero(b.group());
    let mut members = vec![b.group().zero()];
    let mut gens: Vec<GroupElement> = Vec::new();
    for c in candidates {
        if set.contains(&c) {
            continue;
        }
        gens.push(c);
        let mut queue = members.clone();
        while let Some(h) = queue.pop() {
            for g in &gens {
                let y = b.circle(&h, g);
                if set.insert(&y) {
                    members.push(y.clone());
                    queue.push(y);
                }
            }
        }
    }
    set
}

/// `E_0 = A`, `E_{i+1} = ⟨x^{∘p} : x ∈ E_i⟩_∘`, until `{0}`.
pub fn e_subgroup_chain(b: &Brace) -> Result<Vec<ElementSet>> {
    require_enumerable(b)?;
    let g = b.group();
    let mut all = ElementSet::singleton_zero(g);
    for x in g.elements() {
        all.insert(&x);
    }
    let mut chain = vec![all];
    while chain.last().unwrap().len() > 1 && chain.len() <= g.n() as usize + 1 {
        let prev = chain.last().unwrap();
        let powers: Vec<GroupElement> = prev.members().map(|x| b.circle_pow(&x, g.p())).collect();
        chain.push(circle_closure(b, powers));
    }
    Ok(chain)
}

/// `span{a*s : a ∈ A, s ∈ S}`; generators of `S` suffice since star is
/// additive on the right.
pub fn star_span(b: &Brace, s: &Subgroup) -> Result<Subgroup> {
    require_enumerable(b)?;
    let g = b.group();
    let gens = s.generators();
    let mut out = Subgroup::zero(g);
    for a in g.elements() {
        for x in &gens {
            out.insert(&b.star(&a, x));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct StarChain {
    /// `A^1, A^2, ...`, ending at `{0}` when `reached_zero`.
    pub terms: Vec<Subgroup>,
    pub reached_zero: bool,
}

impl StarChain {
    /// `A^j` for `j ≥ 1`; `{0}` beyond the computed terms.
    pub fn term(&self, j: usize) -> Subgroup {
        self.terms.get(j - 1).cloned().unwrap_or_else(|| Subgroup::zero(self.terms[0].group()))
    }
}

pub fn star_power_chain(b: &Brace) -> Result<StarChain> {
    let g = b.group();
    let mut terms = vec![Subgroup::whole(g).with_tag(SubgroupTag::StarPower { j: 1 })];
    while !terms.last().unwrap().is_trivial() && terms.len() <= g.n() as usize {
        let j = terms.len() as u32 + 1;
        terms.push(star_span(b, terms.last().unwrap())?.with_tag(SubgroupTag::StarPower { j }));
    }
    let reached_zero = terms.last().unwrap().is_trivial();
    Ok(StarChain { terms, reached_zero })
}

/// `Q_{0,j} = ann(p^j)`, `Q_{t+1,j} = span(A * Q_{t,j})`.
pub fn q_chain(b: &Brace, t: u32, j: u32) -> Result<Subgroup> {
    let mut q = annihilator(b, j);
    for _ in 0..t {
        q = star_span(b, &q)?;
    }
    Ok(q.with_tag(SubgroupTag::Q { t, j }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentMode {
    Property1,
    Property1Prime,
    Property1DoublePrime,
    Engel,
}

impl DescentMode {
    pub fn default_depth(self, p: u64) -> u32 {
        match self {
            DescentMode::Property1 | DescentMode::Engel => ((p - 1) / 2) as u32,
            DescentMode::Property1Prime | DescentMode::Property1DoublePrime => ((p - 1) / 4) as u32,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DescentMode::Property1 => "1",
            DescentMode::Property1Prime => "1'",
            DescentMode::Property1DoublePrime => "1''",
            DescentMode::Engel => "engel",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: DescentMode,
    pub depth: u32,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub mode: ModeMeta,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn as_clause(&self) -> ClauseReport {
        ClauseReport {
            clause: format!("property_{}", self.property.label()),
            verdict: self.verdict,
            witness: self.witness.clone(),
            mode: self.mode,
            notes: vec![format!("depth {}", self.depth)],
        }
    }
}

fn trace(chain: &[GroupElement]) -> Vec<String> {
    chain.iter().enumerate().map(|(i, e)| format!("e'_{} = {}", i + 1, e)).collect()
}

/// Iterated left star multiplication by `a`, checked against a target
/// subgroup. Everything is additive in the right argument, so right
/// arguments range over generators only.
pub fn check_descent(b: &Brace, depth: Option<u32>, mode: DescentMode, check: &CheckMode) -> Result<PropertyReport> {
    let g = b.group();
    let p = g.p();
    let m = depth.unwrap_or_else(|| mode.default_depth(p));
    if m == 0 && matches!(mode, DescentMode::Property1Prime | DescentMode::Property1DoublePrime) {
        return Err(Error::DepthZero(p));
    }
    let m_us = m as usize;
    let gens = g.generators();
    let n = g.order();
    let in_pa = |x: &GroupElement| g.in_p_power(x, 1);
    let result = match mode {
        DescentMode::Property1 => sweep(&[n, gens.len() as u64], check, |t| {
            let a = g.element_at_unchecked(t[0]);
            let y = &gens[t[1] as usize];
            let chain = b.e_chain(&a, Some(y), m_us);
            let last = chain.last().cloned().unwrap_or_else(|| y.clone());
            (!in_pa(&last)).then(|| Witness::traced(vec![a, y.clone()], trace(&chain)))
        }),
        DescentMode::Engel => sweep(&[n, gens.len() as u64], check, |t| {
            let a = g.element_at_unchecked(t[0]);
            let y = &gens[t[1] as usize];
            let imgs: Vec<GroupElement> = gens.iter().map(|x| b.lambda(&a, x)).collect();
            let lam = match crate::group::AdditiveMap::new(g, imgs) {
                Ok(l) => l.minus_identity(g),
                Err(_) => return Some(Witness::traced(vec![a], vec!["λ_a not additive".into()])),
            };
            let mut cur = y.clone();
            for _ in 0..m {
                cur = lam.apply(g, &cur);
            }
            (!in_pa(&cur)).then(|| Witness::traced(vec![a, y.clone()], vec![format!("(λ_a - I)^{m}(b) = {cur}")]))
        }),
        DescentMode::Property1Prime => sweep(&[n, gens.len() as u64 + 1], check, |t| {
            let a = g.element_at_unchecked(t[0]);
            // last slot is the diagonal clause e'_m(a,a)
            let y = gens.get(t[1] as usize).cloned().unwrap_or_else(|| a.clone());
            let chain = b.e_chain(&a, Some(&y), m_us);
            (!in_pa(chain.last().unwrap())).then(|| Witness::traced(vec![a, y], trace(&chain)))
        }),
        DescentMode::Property1DoublePrime => {
            let pairs: Vec<(u32, GroupElement)> = (1..=g.max_exponent())
                .flat_map(|i| Subgroup::annihilator(g, i).generators().into_iter().map(move |x| (i, x)))
                .collect();
            sweep(&[n, pairs.len() as u64], check, |t| {
                let a = g.element_at_unchecked(t[0]);
                let (i, x) = &pairs[t[1] as usize];
                let chain = b.e_chain(&a, Some(x), m_us);
                let mut tr = trace(&chain);
                tr.push(format!("x ∈ ann(p^{i}), target ann(p^{})", i - 1));
                (!g.in_annihilator(chain.last().unwrap(), i - 1)).then(|| Witness::traced(vec![a, x.clone()], tr))
            })
        }
    };
    let (meta, witness) = result;
    Ok(PropertyReport {
        property: mode,
        depth: m,
        verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
        witness,
        mode: meta,
    })
}

/// Folds a sequence of sweeps into one clause: metadata merged, first
/// witness kept (with its label prepended to the trace).
fn fold_clause(name: &str, parts: Vec<(String, (ModeMeta, Option<Witness>))>) -> ClauseReport {
    let mut meta: Option<ModeMeta> = None;
    let mut witness = None;
    for (label, (m, w)) in parts {
        meta = Some(meta.map_or(m, |x| x.merge(m)));
        if witness.is_none() {
            witness = w.map(|mut w| {
                w.trace.insert(0, label);
                w
            });
        }
    }
    ClauseReport::from_sweep(name, (meta.unwrap_or_else(ModeMeta::structural), witness))
}

/// Ideal and inclusion clauses for the `p^iA` / `ann(p^i)` lattice:
/// (a) ideals, (b) `E_i = p^iA`, (c) `{a^{∘p^i}} = p^iA`,
/// (d) `(p^iA)*ann(p^j) ⊆ ann(p^{j-i})`, (e) `(p^iA)*A^j ⊆ p^i A^{j+1}`,
/// (f) `(p^{j1}a)*((p^{j2}c)*x) ∈ p^{j1+j2}A`.
pub fn verify_ideal_lattice(b: &Brace, check: &CheckMode) -> Result<Report> {
    let g = b.group();
    let big_m = g.max_exponent();
    let n = g.order();
    let mut report = Report::new("ideal-lattice");

    let mut parts = Vec::new();
    for i in 0..=big_m {
        for s in [Subgroup::p_power(g, i), Subgroup::annihilator(g, i)] {
            let c = ideal_check(b, &s, check);
            parts.push((format!("{:?}", s.tag()), (c.mode, c.witness)));
        }
    }
    report.push(fold_clause("a_ideals", parts));

    if u128::from(n) * u128::from(g.n()).pow(2) <= crate::check::EXHAUSTIVE_LIMIT {
        let chain = e_subgroup_chain(b)?;
        let mut bad = None;
        for i in 0..=big_m {
            let e = chain.get(i as usize);
            let target = Subgroup::p_power(g, i);
            let ok = match e {
                Some(e) => e.equals_subgroup(&target),
                None => target.is_trivial(),
            };
            if !ok && bad.is_none() {
                bad = Some(i);
            }
        }
        let mut c = ClauseReport::from_sweep(
            "b_e_chain",
            (
                ModeMeta::exhaustive(u128::from(n)),
                bad.map(|i| Witness::traced(vec![], vec![format!("E_{i} != p^{i}A")])),
            ),
        );
        c.notes.push(format!("chain sizes {:?}", chain.iter().map(ElementSet::len).collect::<Vec<_>>()));
        report.push(c);
    } else {
        report.push(ClauseReport::skipped("b_e_chain", "carrier too large for circle closure"));
    }

    // (c) circle powers: cur[a] = a^{∘p^i}
    let total = u128::from(n) * u128::from(big_m);
    let meta = check.resolve(total);
    if meta.method == crate::check::Method::Exhaustive && n <= ENUMERATION_LIMIT {
        let mut cur: Vec<GroupElement> = g.elements().collect();
        let mut witness = None;
        for i in 1..=big_m {
            cur = cur.iter().map(|x| b.circle_pow(x, g.p())).collect();
            let target = Subgroup::p_power(g, i);
            let mut seen = ElementSet::singleton_zero(g);
            for (k, x) in cur.iter().enumerate() {
                if !target.contains(x) {
                    witness = Some(Witness::traced(vec![g.element_at_unchecked(k as u64)], vec![format!("a^(p^{i}) outside p^{i}A")]));
                    break;
                }
                seen.insert(x);
            }
            if witness.is_none() && seen.len() != target.cardinality() {
                witness = Some(Witness::traced(vec![], vec![format!("p^{i}A not covered by circle powers")]));
            }
            if witness.is_some() {
                break;
            }
        }
        report.push(ClauseReport::from_sweep("c_circle_powers", (ModeMeta::exhaustive(total), witness)));
    } else {
        let r = sweep(&[n, u64::from(big_m)], check, |t| {
            let a = g.element_at_unchecked(t[0]);
            let i = t[1] as u32 + 1;
            let x = b.circle_pow(&a, g.p_pow(i));
            (!g.in_p_power(&x, i)).then(|| Witness::traced(vec![a], vec![format!("a^(p^{i}) outside p^{i}A")]))
        });
        report.push(ClauseReport::from_sweep("c_circle_powers", r).note("sampled: inclusion only"));
    }

    let mut parts = Vec::new();
    for i in 0..=big_m {
        let pa = Subgroup::p_power(g, i);
        for j in i..=big_m {
            let gens = Subgroup::annihilator(g, j).generators();
            let r = sweep(&[pa.cardinality(), gens.len() as u64], check, |t| {
                let x = pa.element_at(t[0]);
                let y = &gens[t[1] as usize];
                (!g.in_annihilator(&b.star(&x, y), j - i)).then(|| Witness::new(vec![x, y.clone()]))
            });
            parts.push((format!("(p^{i}A)*ann(p^{j})"), r));
        }
    }
    report.push(fold_clause("d_annihilator_descent", parts));

    let chain = star_power_chain(b)?;
    let mut parts = Vec::new();
    for i in 0..=big_m {
        let pa = Subgroup::p_power(g, i);
        for j in 1..=chain.terms.len() {
            let gens = chain.term(j).generators();
            let next = chain.term(j + 1).scaled_p(i);
            let r = sweep(&[pa.cardinality(), gens.len() as u64], check, |t| {
                let x = pa.element_at(t[0]);
                let y = &gens[t[1] as usize];
                (!next.contains(&b.star(&x, y))).then(|| Witness::new(vec![x, y.clone()]))
            });
            parts.push((format!("(p^{i}A)*A^{j}"), r));
        }
    }
    report.push(fold_clause("e_star_power_descent", parts));

    let gens = g.generators();
    let e = u64::from(big_m) + 1;
    let r = sweep(&[n, n, gens.len() as u64, e, e], check, |t| {
        let (j1, j2) = (t[3] as u32, t[4] as u32);
        let a1 = g.scale_p(&g.element_at_unchecked(t[0]), j1);
        let a2 = g.scale_p(&g.element_at_unchecked(t[1]), j2);
        let x = &gens[t[2] as usize];
        let v = b.star(&a1, &b.star(&a2, x));
        (!g.in_p_power(&v, j1 + j2)).then(|| {
            Witness::traced(vec![a1, a2, x.clone()], vec![format!("j1 = {j1}, j2 = {j2}")])
        })
    });
    report.push(ClauseReport::from_sweep("f_nested_products", r));
    Ok(report)
}

/// Cyclic factor exponents of a group, from annihilator cardinalities:
/// the number of factors of order at least `p^i` is
/// `log_p |ann(p^i)| - log_p |ann(p^{i-1})|`.
pub fn additive_type(group: &PrimePowerGroup) -> Vec<u32> {
    let top = group.max_exponent();
    let logs: Vec<u32> = (0..=top).map(|i| Subgroup::annihilator(group, i).log_order()).collect();
    let at_least: Vec<u32> = (1..=top as usize).map(|i| logs[i] - logs[i - 1]).collect();
    let mut out = Vec::new();
    for i in (1..=top as usize).rev() {
        let exactly = at_least[i - 1] - at_least.get(i).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(i as u32, exactly as usize));
    }
    out
}

/// Clauses for uniform additive groups: (a) `ann(p^i) = p^{α-i}A`,
/// (b) `1' ⇒ 1''`, (c) `ann(p^{4k}) = p^{α-4k}A`, (d) the type of
/// `A/p^αA` (with `α` defaulting to the smallest exponent).
pub fn uniform_report(b: &Brace, k: u32, alpha: Option<u32>, check: &CheckMode) -> Result<Report> {
    let g = b.group();
    let mut report = Report::new("uniform");
    match g.uniform_exponent() {
        Some(a) => {
            let bad = (0..=a).find(|&i| !Subgroup::annihilator(g, i).same_as(&Subgroup::p_power(g, a - i)));
            report.push(ClauseReport::structural(
                "a_annihilators_are_powers",
                bad.is_none(),
                bad.map(|i| Witness::traced(vec![], vec![format!("ann(p^{i}) != p^{}A", a - i)])),
            ));
        }
        None => report.push(ClauseReport::skipped("a_annihilators_are_powers", "additive group is not uniform")),
    }

    if g.p() <= 3 {
        report.push(ClauseReport::skipped("b_1prime_implies_1doubleprime", "depth floor((p-1)/4) is zero"));
    } else if g.uniform_exponent().is_none() {
        report.push(ClauseReport::skipped("b_1prime_implies_1doubleprime", "additive group is not uniform"));
    } else {
        let one = check_descent(b, None, DescentMode::Property1Prime, check)?;
        let two = check_descent(b, None, DescentMode::Property1DoublePrime, check)?;
        let ok = !one.passed() || two.passed();
        let mut c = ClauseReport::structural("b_1prime_implies_1doubleprime", ok, if ok { None } else { two.witness.clone() });
        c.mode = one.mode.merge(two.mode);
        c.notes.push(format!("1' {:?}, 1'' {:?}", one.verdict, two.verdict));
        report.push(c);
    }

    match g.uniform_exponent() {
        Some(a) if 4 * k <= a => {
            let ok = Subgroup::annihilator(g, 4 * k).same_as(&Subgroup::p_power(g, a - 4 * k));
            report.push(ClauseReport::structural("c_quotient_levels", ok, None));
        }
        Some(_) => report.push(ClauseReport::skipped("c_quotient_levels", "4k exceeds the exponent")),
        None => report.push(ClauseReport::skipped("c_quotient_levels", "additive group is not uniform")),
    }

    let a = alpha.unwrap_or_else(|| g.exponents().iter().copied().min().unwrap_or(0));
    let q = QuotientMap::new(&Subgroup::p_power(g, a));
    let ty = additive_type(q.target());
    let want = vec![a; g.rank()];
    let ok = ty == want;
    report.push(
        ClauseReport::structural(
            "d_quotient_type",
            ok,
            (!ok).then(|| Witness::traced(vec![], vec![format!("type {ty:?}, expected {want:?}")])),
        )
        .note(format!("A/p^{a}A has type {ty:?}")),
    );
    Ok(report)
}
