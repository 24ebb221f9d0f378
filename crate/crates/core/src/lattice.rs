//! Subgroups and quotients of a [`PrimePowerGroup`].
//!
//! A subgroup is stored as a Howell-form basis inside the ambient module
//! `(Z/p^M)^b`, where `M` is the largest factor exponent and `A` embeds by
//! scaling coordinate `j` with `p^{M - a_j}`. The Howell property makes
//! membership, cardinality and lexicographically minimal coset
//! representatives cheap, so large subgroups never have to be enumerated.

use serde::Serialize;

use crate::group::{GroupElement, PrimePowerGroup};
use crate::padic::{checked_pow, inv_mod, mul_mod, sub_mod, valuation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubgroupTag {
    PPower { i: u32 },
    Annihilator { i: u32 },
    EChain { i: u32 },
    StarPower { j: u32 },
    Q { t: u32, j: u32 },
    Custom { name: String },
}

#[derive(Clone, Debug)]
struct Row {
    pivot_exp: u32,
    v: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    group: PrimePowerGroup,
    big_m: u32,
    modulus: u64,
    /// `p^e` for `e = 0..=M`.
    pows: Vec<u64>,
    /// Embedding factors `p^{M - a_j}`.
    lift: Vec<u64>,
    rows: Vec<Option<Row>>,
    tag: SubgroupTag,
}

type Vector = smallvec::SmallVec<[u64; 4]>;

impl Subgroup {
    pub fn zero(group: &PrimePowerGroup) -> Self {
        let big_m = group.max_exponent();
        let pows: Vec<u64> = (0..=big_m).map(|e| checked_pow(group.p(), e).expect("group modulus")).collect();
        let lift = group.exponents().iter().map(|&a| pows[(big_m - a) as usize]).collect();
        Subgroup {
            group: group.clone(),
            big_m,
            modulus: pows[big_m as usize],
            pows,
            lift,
            rows: vec![None; group.rank()],
            tag: SubgroupTag::Custom { name: "span".into() },
        }
    }

    pub fn span<'a, I>(group: &PrimePowerGroup, gens: I) -> Self
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let mut s = Subgroup::zero(group);
        for g in gens {
            s.insert(g);
        }
        s
    }

    pub fn whole(group: &PrimePowerGroup) -> Self {
        Subgroup::span(group, &group.generators()).with_tag(SubgroupTag::Custom { name: "A".into() })
    }

    /// `p^i A`.
    pub fn p_power(group: &PrimePowerGroup, i: u32) -> Self {
        let gens: Vec<_> = group.generators().iter().map(|g| group.scale_p(g, i)).collect();
        Subgroup::span(group, &gens).with_tag(SubgroupTag::PPower { i })
    }

    /// `ann(p^i)`.
    pub fn annihilator(group: &PrimePowerGroup, i: u32) -> Self {
        let gens: Vec<_> = (0..group.rank())
            .map(|j| group.scale_p(&group.generator(j), group.exponents()[j].saturating_sub(i)))
            .collect();
        Subgroup::span(group, &gens).with_tag(SubgroupTag::Annihilator { i })
    }

    pub fn with_tag(mut self, tag: SubgroupTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn tag(&self) -> &SubgroupTag {
        &self.tag
    }

    pub fn group(&self) -> &PrimePowerGroup {
        &self.group
    }

    fn embed(&self, x: &GroupElement) -> Vector {
        x.coords().iter().zip(&self.lift).map(|(&c, &f)| mul_mod(c, f, self.modulus)).collect()
    }

    fn unembed(&self, v: &[u64]) -> GroupElement {
        GroupElement(v.iter().zip(&self.lift).map(|(&c, &f)| c / f).collect())
    }

    fn scaled_vec(&self, v: &[u64], k: u64) -> Vec<u64> {
        v.iter().map(|&x| mul_mod(x, k, self.modulus)).collect()
    }

    fn sub_scaled(&self, v: &mut [u64], r: &[u64], k: u64) {
        for (x, y) in v.iter_mut().zip(r) {
            *x = sub_mod(*x, mul_mod(*y, k, self.modulus), self.modulus);
        }
    }

    fn pow(&self, e: u32) -> u64 {
        match self.pows.get(e as usize) {
            Some(&v) => v,
            None => checked_pow(self.group.p(), e).expect("subgroup order fits in u64"),
        }
    }

    fn normalize(&self, v: &mut [u64], c: usize) -> u32 {
        let p = self.group.p();
        let e = valuation(v[c], p).expect("non-zero pivot");
        let unit = v[c] / self.pow(e);
        let inv = inv_mod(unit % self.modulus, self.modulus).expect("unit");
        for x in v.iter_mut() {
            *x = mul_mod(*x, inv, self.modulus);
        }
        e
    }

    fn absorb(&mut self, v: Vec<u64>) {
        let beta = self.group.rank();
        let mut work = vec![v];
        while let Some(mut v) = work.pop() {
            let mut c = 0;
            while c < beta {
                if v[c] == 0 {
                    c += 1;
                    continue;
                }
                let e = self.normalize(&mut v, c);
                match self.rows[c].take() {
                    None => {
                        let ann = self.scaled_vec(&v, self.pow(self.big_m - e));
                        if ann.iter().any(|&x| x != 0) {
                            work.push(ann);
                        }
                        self.rows[c] = Some(Row { pivot_exp: e, v });
                        break;
                    }
                    Some(row) if row.pivot_exp <= e => {
                        self.sub_scaled(&mut v, &row.v, self.pow(e - row.pivot_exp));
                        self.rows[c] = Some(row);
                        c += 1;
                    }
                    Some(row) => {
                        let ann = self.scaled_vec(&v, self.pow(self.big_m - e));
                        if ann.iter().any(|&x| x != 0) {
                            work.push(ann);
                        }
                        let mut old = row.v;
                        self.sub_scaled(&mut old, &v, self.pow(row.pivot_exp - e));
                        self.rows[c] = Some(Row { pivot_exp: e, v });
                        v = old;
                        c += 1;
                    }
                }
            }
        }
    }

    fn reduce(&self, v: &mut [u64]) -> bool {
        for c in 0..v.len() {
            if v[c] == 0 {
                continue;
            }
            let Some(row) = &self.rows[c] else { return false };
            let e = valuation(v[c], self.group.p()).unwrap();
            if e < row.pivot_exp {
                return false;
            }
            let q = v[c] / self.pow(row.pivot_exp);
            self.sub_scaled(v, &row.v, q);
        }
        true
    }

    fn restore_howell(&mut self) {
        loop {
            let pending: Vec<Vec<u64>> = self
                .rows
                .iter()
                .flatten()
                .map(|r| self.scaled_vec(&r.v, self.pow(self.big_m - r.pivot_exp)))
                .filter(|w| {
                    let mut w = w.clone();
                    !self.reduce(&mut w)
                })
                .collect();
            if pending.is_empty() {
                return;
            }
            for w in pending {
                self.absorb(w);
            }
        }
    }

    /// Adds `x` to the generating set.
    pub fn insert(&mut self, x: &GroupElement) {
        let v = self.embed(x);
        if v.iter().all(|&c| c == 0) {
            return;
        }
        let mut probe = v.clone();
        if self.reduce(&mut probe) {
            return;
        }
        self.absorb(v.to_vec());
        self.restore_howell();
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        let mut v = self.embed(x);
        self.reduce(&mut v)
    }

    /// `log_p |S|`.
    pub fn log_order(&self) -> u32 {
        self.rows.iter().flatten().map(|r| self.big_m - r.pivot_exp).sum()
    }

    pub fn cardinality(&self) -> u64 {
        self.pow(self.log_order())
    }

    pub fn is_trivial(&self) -> bool {
        self.rows.iter().all(Option::is_none)
    }

    /// A generating set (the Howell rows, in group coordinates).
    pub fn generators(&self) -> Vec<GroupElement> {
        self.rows.iter().flatten().map(|r| self.unembed(&r.v)).collect()
    }

    /// All elements, each exactly once.
    pub fn elements(&self) -> Vec<GroupElement> {
        let rows: Vec<&Row> = self.rows.iter().flatten().collect();
        let bounds: Vec<u64> = rows.iter().map(|r| self.pow(self.big_m - r.pivot_exp)).collect();
        let mut out = Vec::with_capacity(self.cardinality() as usize);
        let mut coeff = vec![0u64; rows.len()];
        let beta = self.group.rank();
        loop {
            let mut v = vec![0u64; beta];
            for (k, r) in coeff.iter().zip(&rows) {
                for (x, y) in v.iter_mut().zip(&r.v) {
                    *x = (*x + mul_mod(*y, *k, self.modulus)) % self.modulus;
                }
            }
            out.push(self.unembed(&v));
            let mut i = 0;
            loop {
                if i == coeff.len() {
                    return out;
                }
                coeff[i] += 1;
                if coeff[i] < bounds[i] {
                    break;
                }
                coeff[i] = 0;
                i += 1;
            }
        }
    }

    /// The element with mixed-radix coefficient index `idx` over the Howell
    /// rows; a bijection `[0, |S|) -> S`.
    pub fn element_at(&self, mut idx: u64) -> GroupElement {
        let mut v = vec![0u64; self.group.rank()];
        for row in self.rows.iter().flatten() {
            let bound = self.pow(self.big_m - row.pivot_exp);
            let k = idx % bound;
            idx /= bound;
            if k != 0 {
                for (x, y) in v.iter_mut().zip(&row.v) {
                    *x = (*x + mul_mod(*y, k, self.modulus)) % self.modulus;
                }
            }
        }
        self.unembed(&v)
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.generators().iter().all(|g| other.contains(g))
    }

    /// Set equality by mutual inclusion.
    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// `p^i S`.
    pub fn scaled_p(&self, i: u32) -> Subgroup {
        let gens: Vec<_> = self.generators().iter().map(|g| self.group.scale_p(g, i)).collect();
        Subgroup::span(&self.group, &gens)
    }

    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut s = self.clone();
        for g in other.generators() {
            s.insert(&g);
        }
        s.with_tag(SubgroupTag::Custom { name: "sum".into() })
    }

    /// The lexicographically minimal element of the coset `x + S`.
    pub fn coset_min(&self, x: &GroupElement) -> GroupElement {
        let mut v = self.embed(x);
        for c in 0..v.len() {
            if let Some(row) = &self.rows[c] {
                let q = v[c] / self.pow(row.pivot_exp);
                if q != 0 {
                    self.sub_scaled(&mut v, &row.v, q);
                }
            }
        }
        self.unembed(&v)
    }

    /// For subgroups of the form `sum_j p^{e_j} C_{p^{a_j}}`, the exponents
    /// `e_j` (with `e_j = a_j` for a vanishing coordinate).
    pub fn aligned_exponents(&self) -> Option<Vec<u32>> {
        let exps = self.group.exponents();
        let mut out: Vec<u32> = exps.to_vec();
        for (c, row) in self.rows.iter().enumerate() {
            if let Some(r) = row {
                if r.v.iter().enumerate().any(|(j, &x)| j != c && x != 0) {
                    return None;
                }
                out[c] = r.pivot_exp - (self.big_m - exps[c]);
            }
        }
        Some(out)
    }
}

/// The projection `A -> A/I` onto a coordinate form of the quotient,
/// together with the canonical (lexicographically minimal) lift.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    parent: PrimePowerGroup,
    ideal: Subgroup,
    target: PrimePowerGroup,
    kind: QuotientKind,
}

#[derive(Clone, Debug)]
enum QuotientKind {
    Aligned { kept: Vec<usize> },
    General { c: Vec<Vec<u64>>, cinv: Vec<Vec<u64>>, kept: Vec<usize>, modulus: u64 },
}

impl QuotientMap {
    pub fn new(ideal: &Subgroup) -> Self {
        let parent = ideal.group().clone();
        let p = parent.p();
        if let Some(e) = ideal.aligned_exponents() {
            let kept: Vec<usize> = (0..parent.rank()).filter(|&j| e[j] > 0).collect();
            let exps: Vec<u32> = kept.iter().map(|&j| e[j]).collect();
            return QuotientMap {
                target: PrimePowerGroup::trivial_or(p, &exps),
                parent,
                ideal: ideal.clone(),
                kind: QuotientKind::Aligned { kept },
            };
        }
        let (diag, c, cinv, modulus) = smith_form(&parent, &ideal.generators());
        let kept: Vec<usize> = (0..diag.len()).filter(|&t| diag[t] > 0).collect();
        let exps: Vec<u32> = kept.iter().map(|&t| diag[t]).collect();
        QuotientMap {
            target: PrimePowerGroup::trivial_or(p, &exps),
            parent,
            ideal: ideal.clone(),
            kind: QuotientKind::General { c, cinv, kept, modulus },
        }
    }

    pub fn parent(&self) -> &PrimePowerGroup {
        &self.parent
    }

    pub fn ideal(&self) -> &Subgroup {
        &self.ideal
    }

    pub fn target(&self) -> &PrimePowerGroup {
        &self.target
    }

    pub fn project(&self, x: &GroupElement) -> GroupElement {
        match &self.kind {
            QuotientKind::Aligned { kept } => GroupElement(
                kept.iter()
                    .enumerate()
                    .map(|(t, &j)| x.coords()[j] % self.target.modulus(t))
                    .collect(),
            ),
            QuotientKind::General { c, kept, modulus, .. } => GroupElement(
                kept.iter()
                    .enumerate()
                    .map(|(t, &col)| {
                        let s = x
                            .coords()
                            .iter()
                            .zip(c)
                            .fold(0u64, |acc, (&xi, row)| (acc + mul_mod(xi, row[col], *modulus)) % modulus);
                        s % self.target.modulus(t)
                    })
                    .collect(),
            ),
        }
    }

    pub fn project_index(&self, x: &GroupElement) -> u64 {
        self.target.index_of(&self.project(x))
    }

    /// Canonical representative of a quotient element.
    pub fn lift(&self, y: &GroupElement) -> GroupElement {
        match &self.kind {
            QuotientKind::Aligned { kept } => {
                let mut x = self.parent.zero();
                for (t, &j) in kept.iter().enumerate() {
                    x.0[j] = y.coords()[t];
                }
                x
            }
            QuotientKind::General { cinv, kept, modulus, .. } => {
                let beta = self.parent.rank();
                let mut z = vec![0u64; beta];
                for (t, &row) in kept.iter().enumerate() {
                    for (j, zj) in z.iter_mut().enumerate() {
                        *zj = (*zj + mul_mod(y.coords()[t], cinv[row][j], *modulus)) % modulus;
                    }
                }
                let x = GroupElement(
                    z.iter().enumerate().map(|(j, &v)| v % self.parent.modulus(j)).collect(),
                );
                self.ideal.coset_min(&x)
            }
        }
    }
}

/// Smith form of the relation matrix `[diag(p^{a_j}); gens]` over `Z/p^M`.
/// Returns the diagonal exponents, the column transform `C` and its inverse.
fn smith_form(
    group: &PrimePowerGroup,
    gens: &[GroupElement],
) -> (Vec<u32>, Vec<Vec<u64>>, Vec<Vec<u64>>, u64) {
    let p = group.p();
    let big_m = group.max_exponent();
    let modulus = checked_pow(p, big_m).unwrap();
    let beta = group.rank();
    let mut r: Vec<Vec<u64>> = (0..beta)
        .map(|j| {
            let mut row = vec![0u64; beta];
            row[j] = group.modulus(j) % modulus;
            row
        })
        .collect();
    r.extend(gens.iter().map(|g| g.to_vec()));
    let ident = |k: usize| -> Vec<Vec<u64>> {
        (0..k).map(|i| (0..k).map(|j| u64::from(i == j)).collect()).collect()
    };
    let mut c = ident(beta);
    let mut cinv = ident(beta);
    let mut diag = vec![big_m; beta];
    let pw = |e: u32| checked_pow(p, e).unwrap();

    for t in 0..beta {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in r.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if let Some(v) = valuation(x, p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        r.swap(i, t);
        if j != t {
            for row in r.iter_mut() {
                row.swap(j, t);
            }
            for row in c.iter_mut() {
                row.swap(j, t);
            }
            cinv.swap(j, t);
        }
        let unit = r[t][t] / pw(v);
        let w = inv_mod(unit, modulus).expect("unit pivot");
        for row in r.iter_mut() {
            row[t] = mul_mod(row[t], w, modulus);
        }
        for row in c.iter_mut() {
            row[t] = mul_mod(row[t], w, modulus);
        }
        for x in cinv[t].iter_mut() {
            *x = mul_mod(*x, unit, modulus);
        }
        let pivot_row = r[t].clone();
        for (i, row) in r.iter_mut().enumerate() {
            if i == t || row[t] == 0 {
                continue;
            }
            let f = row[t] / pw(v);
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = sub_mod(*x, mul_mod(*y, f, modulus), modulus);
            }
        }
        for j in t + 1..beta {
            let f = r[t][j] / pw(v);
            if f == 0 {
                continue;
            }
            r[t][j] = 0;
            for row in c.iter_mut() {
                row[j] = sub_mod(row[j], mul_mod(row[t], f, modulus), modulus);
            }
            let add: Vec<u64> = cinv[j].iter().map(|&y| mul_mod(y, f, modulus)).collect();
            for (x, y) in cinv[t].iter_mut().zip(add) {
                *x = (*x + y) % modulus;
            }
        }
        diag[t] = v;
    }
    (diag, c, cinv, modulus)
}

/// Invariant-factor exponents of `A/I`, largest first.
pub fn quotient_type(ideal: &Subgroup) -> Vec<u32> {
    let q = QuotientMap::new(ideal);
    let mut t = q.target().exponents().to_vec();
    t.sort_unstable_by(|a, b| b.cmp(a));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    // Independent oracle: BFS closure under addition.
    fn brute_span(g: &PrimePowerGroup, gens: &[GroupElement]) -> HashSet<GroupElement> {
        let mut seen: HashSet<GroupElement> = HashSet::new();
        seen.insert(g.zero());
        let mut queue = vec![g.zero()];
        while let Some(x) = queue.pop() {
            for s in gens {
                let y = g.add(&x, s);
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn structural_subgroups() {
        let g = PrimePowerGroup::new(5, &[4]).unwrap();
        assert_eq!(Subgroup::p_power(&g, 1).cardinality(), 125);
        assert_eq!(Subgroup::p_power(&g, 0).cardinality(), 625);
        assert_eq!(Subgroup::p_power(&g, 9).cardinality(), 1);
        assert_eq!(Subgroup::annihilator(&g, 2).cardinality(), 25);
        assert!(Subgroup::annihilator(&g, 0).is_trivial());
        let h = PrimePowerGroup::new(5, &[1, 1]).unwrap();
        assert_eq!(Subgroup::annihilator(&h, 1).cardinality(), 25);
    }

    #[test]
    fn coset_min_is_lexicographic_minimum() {
        let g = PrimePowerGroup::new(3, &[2, 1]).unwrap();
        let s = Subgroup::span(&g, &[g.element(&[3, 1]).unwrap()]);
        for x in g.elements() {
            let brute = g
                .elements()
                .filter(|y| s.contains(&g.sub(y, &x)))
                .min()
                .unwrap();
            assert_eq!(s.coset_min(&x), brute);
        }
    }

    #[test]
    fn quotient_types() {
        let g = PrimePowerGroup::new(5, &[3, 2]).unwrap();
        assert_eq!(quotient_type(&Subgroup::p_power(&g, 2)), vec![2, 2]);
        let h = PrimePowerGroup::new(5, &[1, 1]).unwrap();
        let diag = Subgroup::span(&h, &[h.element(&[1, 1]).unwrap()]);
        assert_eq!(quotient_type(&diag), vec![1]);
        assert_eq!(quotient_type(&Subgroup::whole(&h)), Vec::<u32>::new());
    }

    fn arb_case() -> impl Strategy<Value = (u64, Vec<u32>, Vec<Vec<u64>>)> {
        let shapes: Vec<(u64, Vec<u32>)> = vec![
            (3, vec![1]),
            (3, vec![3]),
            (3, vec![2, 1]),
            (3, vec![1, 2]),
            (3, vec![1, 1, 1]),
            (3, vec![3, 1, 2]),
            (3, vec![2, 2, 2]),
            (5, vec![2]),
            (5, vec![1, 1]),
            (5, vec![2, 1]),
            (5, vec![1, 3]),
            (5, vec![1, 1, 1]),
        ];
        prop::sample::select(shapes).prop_flat_map(|(p, exps)| {
            let gens =
                prop::collection::vec(prop::collection::vec(0u64..u64::MAX, exps.len()), 0..4);
            (Just(p), Just(exps), gens)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn howell_span_matches_brute_force((p, exps, raw) in arb_case()) {
            let g = PrimePowerGroup::new(p, &exps).unwrap();
            let gens: Vec<GroupElement> = raw
                .iter()
                .map(|v| GroupElement(v.iter().zip(g.moduli()).map(|(x, m)| x % m).collect()))
                .collect();
            let s = Subgroup::span(&g, &gens);
            let brute = brute_span(&g, &gens);
            prop_assert_eq!(s.cardinality() as usize, brute.len());
            for x in g.elements() {
                prop_assert_eq!(s.contains(&x), brute.contains(&x));
            }
            let listed: HashSet<_> = s.elements().into_iter().collect();
            prop_assert_eq!(&listed, &brute);
            let indexed: HashSet<_> = (0..s.cardinality()).map(|i| s.element_at(i)).collect();
            prop_assert_eq!(indexed, brute);

            let q = QuotientMap::new(&s);
            prop_assert_eq!(q.target().order() * s.cardinality(), g.order());
            for x in g.elements() {
                // projection is a homomorphism with kernel S, and the lift is the coset minimum
                let px = q.project(&x);
                prop_assert_eq!(px.is_zero(), s.contains(&x));
                let l = q.lift(&px);
                prop_assert!(s.contains(&g.sub(&l, &x)));
                prop_assert_eq!(&l, &s.coset_min(&x));
            }
        }
    }
}
