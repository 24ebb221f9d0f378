//! Corpus generators, the small-brace enumerator, JSON documents and the
//! suite runner behind the CLI.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::brace::{validate_brace, Brace, StarBackend, TABLE_LIMIT};
use crate::check::{CheckMode, ClauseReport, Report};
use crate::error::{Error, Result};
use crate::filtration::{check_descent, uniform_report, verify_ideal_lattice, DescentMode};
use crate::flows::{brace_from_prelie, verify_flows_roundtrip, verify_main_recovery, FlowContext};
use crate::group::{AdditiveMap, GroupElement, PrimePowerGroup};
use crate::lattice::Subgroup;
use crate::prelie::{
    build_quotient_prelie, left_nilpotency_index, make_section, verify_dot_properties, verify_f_injective,
    verify_nilpotency_transfer, verify_prelie_axioms, verify_section_additivity, BuildParams, PreLieRing, Provenance,
    QuotientPreLie, SectionPolicy,
};

pub const BRACE_FORMAT: &str = "brace-v1";
pub const PRELIE_FORMAT: &str = "prelie-v1";

pub fn gen_trivial(p: u64, exponents: &[u32]) -> Result<Brace> {
    let g = PrimePowerGroup::new(p, exponents)?;
    Brace::trivial(&g).certified(&CheckMode::default())
}

/// `a*b = p^s ab` on `Z/p^α`; `s = 0` is rejected with the witness
/// `a = p^α - 1`, for which `1 + a` is not a unit.
pub fn gen_ring_brace(p: u64, alpha: u32, s: u32) -> Result<Brace> {
    let g = PrimePowerGroup::new(p, &[alpha])?;
    if s == 0 {
        return Err(Error::NotABrace {
            reason: "1 + a is not invertible, so a has no circle inverse".into(),
            witness: vec![vec![g.modulus(0) - 1]],
        });
    }
    Brace::ring(p, alpha, s)?.certified(&CheckMode::default())
}

pub fn gen_heisenberg(p: u64) -> Result<Brace> {
    Brace::heisenberg(p)?.certified(&CheckMode::default())
}

pub fn gen_direct_product(b1: &Brace, b2: &Brace) -> Result<Brace> {
    Brace::product(b1, b2)?.certified(&CheckMode::default())
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub braces: Vec<Brace>,
    pub count: usize,
    /// False when the node budget ran out first.
    pub complete: bool,
    pub nodes: u64,
}

/// Automorphisms of `A` of `p`-power order, with application and
/// composition tables over element indices.
struct AutTable {
    maps: Vec<AdditiveMap>,
    apply: Vec<Vec<u32>>,
    compose: Vec<Vec<Option<u32>>>,
}

impl AutTable {
    fn new(g: &PrimePowerGroup) -> Self {
        let n = g.order();
        let gens = g.generators();
        let mut maps = Vec::new();
        // images of the generators, ranging over all tuples in index order
        let r = gens.len() as u32;
        let mut choice = vec![0u64; gens.len()];
        'outer: loop {
            let images: Vec<GroupElement> = choice.iter().map(|&i| g.element_at_unchecked(i)).collect();
            if let Ok(m) = AdditiveMap::new(g, images) {
                if m.is_bijective(g) && has_p_power_order(g, &m) {
                    maps.push(m);
                }
            }
            for j in 0..r as usize {
                choice[j] += 1;
                if choice[j] < n {
                    continue 'outer;
                }
                choice[j] = 0;
            }
            break;
        }
        let apply: Vec<Vec<u32>> =
            maps.iter().map(|m| g.elements().map(|x| g.index_of(&m.apply(g, &x)) as u32).collect()).collect();
        let lookup: HashMap<&[u32], u32> = apply.iter().enumerate().map(|(i, a)| (a.as_slice(), i as u32)).collect();
        let compose = apply
            .iter()
            .map(|f| {
                apply
                    .iter()
                    .map(|h| {
                        let fh: Vec<u32> = h.iter().map(|&y| f[y as usize]).collect();
                        lookup.get(fh.as_slice()).copied()
                    })
                    .collect()
            })
            .collect();
        AutTable { maps, apply, compose }
    }
}

fn has_p_power_order(g: &PrimePowerGroup, m: &AdditiveMap) -> bool {
    let id = AdditiveMap::identity(g);
    let mut cur = m.clone();
    let mut order = 1u64;
    while cur != id {
        if order > g.order() * g.order() {
            return false;
        }
        cur = cur.compose(g, m);
        order += 1;
    }
    let mut o = order;
    while o.is_multiple_of(g.p()) {
        o /= g.p();
    }
    o == 1
}

/// All braces on `A` (as raw λ-tables, no isomorphism reduction), by
/// backtracking over λ on the smallest unassigned element and closing under
/// `λ_{a∘b} = λ_a λ_b`, `a∘b = a + λ_a(b)`.
pub fn enumerate_small(p: u64, exponents: &[u32], budget: u64) -> Result<Enumeration> {
    let g = PrimePowerGroup::new(p, exponents)?;
    if p > 7 || g.order() > p * p {
        return Err(Error::InvalidArgument(format!("enumeration needs p ≤ 7 and |A| ≤ p², got p = {p}, |A| = {}", g.order())));
    }
    let auts = AutTable::new(&g);
    let n = g.order() as usize;
    let add: Vec<Vec<u32>> = (0..n)
        .map(|a| {
            let x = g.element_at_unchecked(a as u64);
            (0..n).map(|b| g.index_of(&g.add(&x, &g.element_at_unchecked(b as u64))) as u32).collect()
        })
        .collect();
    let id = auts.apply.iter().position(|a| a.iter().enumerate().all(|(i, &v)| v as usize == i)).unwrap() as u32;

    struct Search<'a> {
        auts: &'a AutTable,
        add: &'a [Vec<u32>],
        found: Vec<Vec<u32>>,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        /// Extends `lam` to its closure; false on a conflict.
        fn close(&self, lam: &mut [Option<u32>]) -> bool {
            loop {
                let mut changed = false;
                let assigned: Vec<usize> = (0..lam.len()).filter(|&i| lam[i].is_some()).collect();
                for &a in &assigned {
                    let la = lam[a].unwrap();
                    for &b in &assigned {
                        let lb = lam[b].unwrap();
                        let c = self.add[a][self.auts.apply[la as usize][b] as usize] as usize;
                        let Some(lc) = self.auts.compose[la as usize][lb as usize] else { return false };
                        match lam[c] {
                            Some(v) if v != lc => return false,
                            Some(_) => {}
                            None => {
                                lam[c] = Some(lc);
                                changed = true;
                            }
                        }
                    }
                }
                if !changed {
                    return true;
                }
            }
        }

        fn run(&mut self, lam: Vec<Option<u32>>) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            let Some(next) = lam.iter().position(Option::is_none) else {
                self.found.push(lam.into_iter().map(Option::unwrap).collect());
                return true;
            };
            for cand in 0..self.auts.maps.len() as u32 {
                let mut l = lam.clone();
                l[next] = Some(cand);
                if self.close(&mut l) && !self.run(l) {
                    return false;
                }
            }
            true
        }
    }

    let mut lam = vec![None; n];
    lam[0] = Some(id);
    let mut search = Search { auts: &auts, add: &add, found: Vec::new(), nodes: 0, budget };
    let complete = search.close(&mut lam) && search.run(lam);
    let mut braces = Vec::with_capacity(search.found.len());
    for row in &search.found {
        let maps = row.iter().map(|&i| auts.maps[i as usize].clone()).collect();
        braces.push(Brace::from_lambda_table(&g, maps)?.certified(&CheckMode::Exhaustive)?);
    }
    Ok(Enumeration { count: braces.len(), braces, complete, nodes: search.nodes })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreLieDocument {
    pub format: String,
    pub p: u64,
    pub exponents: Vec<u32>,
    /// `product_table[x][y]` is the index of `x·y`.
    pub product_table: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BraceOp {
    Trivial,
    Ring { s: u32 },
    Heisenberg,
    /// `table[x][y]` is the index of `x*y`.
    StarTable { table: Vec<Vec<u32>> },
    /// `rows[a][j]` is the index of `λ_a(e_j)` for the standard generators.
    LambdaTable { rows: Vec<Vec<u32>> },
    Flows { prelie: PreLieDocument },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraceDocument {
    pub format: String,
    pub p: u64,
    pub exponents: Vec<u32>,
    pub op: BraceOp,
}

fn split_rows(flat: &[u32], n: usize) -> Vec<Vec<u32>> {
    flat.chunks(n.max(1)).map(<[u32]>::to_vec).collect()
}

fn flatten_rows(rows: &[Vec<u32>], n: usize, what: &str) -> Result<Vec<u32>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Document(format!("{what} must be {n} rows of {n} indices")));
    }
    Ok(rows.concat())
}

impl PreLieDocument {
    pub fn from_ring(ring: &PreLieRing) -> Result<Self> {
        let c = ring.carrier();
        Ok(PreLieDocument {
            format: PRELIE_FORMAT.into(),
            p: c.p(),
            exponents: c.exponents().to_vec(),
            product_table: split_rows(&ring.table()?, c.order() as usize),
        })
    }

    pub fn to_ring(&self) -> Result<PreLieRing> {
        if self.format != PRELIE_FORMAT {
            return Err(Error::Document(format!("expected format {PRELIE_FORMAT}, found {}", self.format)));
        }
        let c = PrimePowerGroup::new(self.p, &self.exponents)?;
        let n = c.order() as usize;
        PreLieRing::from_table(&c, flatten_rows(&self.product_table, n, "product_table")?, Provenance::External)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl BraceDocument {
    pub fn new(p: u64, exponents: &[u32], op: BraceOp) -> Self {
        BraceDocument { format: BRACE_FORMAT.into(), p, exponents: exponents.to_vec(), op }
    }

    /// Formula backends keep their names; everything else is tabulated.
    pub fn from_brace(b: &Brace) -> Result<Self> {
        let g = b.group();
        let n = g.order() as usize;
        let op = match b.backend() {
            StarBackend::Trivial => BraceOp::Trivial,
            StarBackend::Ring { s, .. } => BraceOp::Ring { s: *s },
            StarBackend::Heisenberg => BraceOp::Heisenberg,
            StarBackend::LambdaTable(maps) => BraceOp::LambdaTable {
                rows: maps.iter().map(|m| m.images().iter().map(|x| g.index_of(x) as u32).collect()).collect(),
            },
            _ => BraceOp::StarTable { table: split_rows(&b.star_table()?, n) },
        };
        Ok(BraceDocument::new(g.p(), g.exponents(), op))
    }

    pub fn flows(ring: &PreLieRing) -> Result<Self> {
        let c = ring.carrier();
        Ok(BraceDocument::new(c.p(), c.exponents(), BraceOp::Flows { prelie: PreLieDocument::from_ring(ring)? }))
    }

    /// The brace described, validated.
    pub fn to_brace(&self) -> Result<Brace> {
        if self.format != BRACE_FORMAT {
            return Err(Error::Document(format!("expected format {BRACE_FORMAT}, found {}", self.format)));
        }
        let g = PrimePowerGroup::new(self.p, &self.exponents)?;
        let n = g.order() as usize;
        let check = CheckMode::default();
        match &self.op {
            BraceOp::Trivial => Brace::trivial(&g).certified(&check),
            BraceOp::Ring { s } => {
                if self.exponents.len() != 1 {
                    return Err(Error::Document("ring braces live on a cyclic group".into()));
                }
                gen_ring_brace(self.p, self.exponents[0], *s)
            }
            BraceOp::Heisenberg => {
                if self.exponents != [1, 1] {
                    return Err(Error::Document("the Heisenberg brace lives on C_p + C_p".into()));
                }
                gen_heisenberg(self.p)
            }
            BraceOp::StarTable { table } => {
                if n as u64 > TABLE_LIMIT {
                    return Err(Error::Document(format!("star tables are limited to {TABLE_LIMIT} elements")));
                }
                Brace::from_star_table(&g, flatten_rows(table, n, "star table")?)?.certified(&check)
            }
            BraceOp::LambdaTable { rows } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != g.rank()) {
                    return Err(Error::Document(format!("lambda table must be {n} rows of {} indices", g.rank())));
                }
                let maps = rows
                    .iter()
                    .map(|r| {
                        let images = r.iter().map(|&i| g.element_at(u64::from(i))).collect::<Result<Vec<_>>>()?;
                        AdditiveMap::new(&g, images)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Brace::from_lambda_table(&g, maps)?.certified(&check)
            }
            BraceOp::Flows { prelie } => {
                if prelie.p != self.p || prelie.exponents != self.exponents {
                    return Err(Error::Document("pre-Lie carrier differs from the brace group".into()));
                }
                brace_from_prelie(&FlowContext::new(prelie.to_ring()?)?, &check)
            }
        }
    }

    /// Canonical compact JSON: fixed key order, no whitespace.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Axioms,
    Properties,
    Filtration,
    Prelie,
    Flows,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "axioms" => Suite::Axioms,
            "properties" => Suite::Properties,
            "filtration" => Suite::Filtration,
            "prelie" => Suite::Prelie,
            "flows" => Suite::Flows,
            "all" => Suite::All,
            _ => return Err(Error::UnknownSuite(s.into())),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub check: CheckMode,
    pub k: Option<u32>,
    pub depth: Option<u32>,
    pub section: SectionPolicy,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { check: CheckMode::default(), k: None, depth: None, section: SectionPolicy::Canonical }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub brace: String,
    pub passed: bool,
    pub check: CheckMode,
    pub reports: Vec<Report>,
    pub timing_ms: BTreeMap<String, u64>,
}

impl SuiteResult {
    /// Failed clauses as `report/clause` names.
    pub fn failures(&self) -> Vec<String> {
        self.reports
            .iter()
            .flat_map(|r| r.failures().map(move |c| format!("{}/{}", r.name, c.clause)))
            .collect()
    }

    /// The result with timings removed, for determinism comparisons.
    pub fn untimed(&self) -> SuiteResult {
        SuiteResult { timing_ms: BTreeMap::new(), ..self.clone() }
    }
}

fn error_report(name: &str, clause: &str, e: &Error) -> Report {
    let mut r = Report::new(name);
    r.push(ClauseReport::structural(clause, false, None).note(e.to_string()));
    r
}

fn skipped_report(name: &str, why: impl Into<String>) -> Report {
    let mut r = Report::new(name);
    r.push(ClauseReport::skipped(name, why));
    r
}

pub fn properties_report(b: &Brace, depth: Option<u32>, check: &CheckMode) -> Result<Report> {
    let mut report = Report::new("properties");
    for mode in [DescentMode::Property1, DescentMode::Property1Prime, DescentMode::Property1DoublePrime, DescentMode::Engel] {
        match check_descent(b, depth, mode, check) {
            Ok(r) => report.push(r.as_clause()),
            Err(Error::DepthZero(p)) => report.push(ClauseReport::skipped(
                format!("property_{}", mode.label()),
                format!("depth floor((p-1)/4) is zero for p = {p}"),
            )),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn prelie_reports(b: &Brace, opts: &SuiteOptions, out: &mut Vec<Report>) -> Option<(BuildParams, QuotientPreLie)> {
    let g = b.group();
    let check = &opts.check;
    let params = match BuildParams::new(g, opts.k) {
        Ok(p) => p,
        Err(e) => {
            out.push(skipped_report("prelie", e.to_string()));
            return None;
        }
    };
    let section = match make_section(b, params.k, opts.section, check) {
        Ok(s) => s,
        Err(e) => {
            out.push(error_report("prelie", "section", &e));
            return None;
        }
    };
    let qp = match build_quotient_prelie(b, &params, &section, check) {
        Ok(q) => q,
        Err(e) => {
            out.push(error_report("prelie", "build", &e));
            return None;
        }
    };
    let mut build = Report::new("prelie-build");
    build.push(
        ClauseReport::structural("build", true, None)
            .note(format!("A/ann(p^{}) has {} cosets", 2 * params.k, qp.carrier().order())),
    );
    for n in qp.notices() {
        build.notice(n.clone());
    }
    out.push(build);
    let ann = Subgroup::annihilator(g, 2 * params.k);
    match verify_section_additivity(&section, &ann, check) {
        Ok(r) => out.push(r),
        Err(e) => out.push(error_report("section-additivity", "precondition", &e)),
    }
    match verify_f_injective(b, &params, &section) {
        Ok(r) => out.push(r),
        Err(e) => out.push(error_report("f-map", "f_map", &e)),
    }
    let ring = qp.ring();
    let mut axioms = verify_prelie_axioms(&ring, &check.with_count(1_000_000));
    match left_nilpotency_index(&ring) {
        Ok(nil) => {
            let bound = g.n() as usize + 1;
            axioms.push(
                ClauseReport::structural("left_nilpotency_bound", nil.index <= bound, None)
                    .note(format!("index {} ≤ {bound}, chain {:?}", nil.index, nil.chain)),
            );
        }
        Err(e) => axioms.push(ClauseReport::structural("left_nilpotency_bound", false, None).note(e.to_string())),
    }
    out.push(axioms);
    match verify_nilpotency_transfer(b, &qp) {
        Ok(r) => out.push(r),
        Err(e) => out.push(error_report("nilpotency-transfer", "transfer", &e)),
    }
    out.push(verify_dot_properties(b, &qp, check));
    Some((params, qp))
}

fn flows_reports(b: &Brace, built: Option<&(BuildParams, QuotientPreLie)>, opts: &SuiteOptions, out: &mut Vec<Report>) {
    let check = &opts.check;
    let params = match built {
        Some((p, _)) => p.clone(),
        None => match BuildParams::new(b.group(), opts.k) {
            Ok(p) => p,
            Err(e) => {
                out.push(skipped_report("flows", e.to_string()));
                return;
            }
        },
    };
    match verify_flows_roundtrip(b, &params, check) {
        Ok(r) => out.push(r),
        Err(e) => out.push(error_report("flows-roundtrip", "passage", &e)),
    }
    let Some((_, qp)) = built else { return };
    match verify_main_recovery(b, qp, check) {
        Ok(r) => out.push(r),
        Err(e) => out.push(error_report("main-recovery", "q_prime", &e)),
    }
}

/// Runs a check bundle on a document. Errors only for documents that do
/// not describe a brace; check failures are part of the result.
pub fn run_suite(doc: &BraceDocument, suite: Suite, opts: &SuiteOptions) -> Result<SuiteResult> {
    let b = doc.to_brace()?;
    let check = &opts.check;
    let mut reports = Vec::new();
    let mut timing = BTreeMap::new();
    let mut timed = |name: &str, reports: &mut Vec<Report>, f: &mut dyn FnMut(&mut Vec<Report>)| {
        let t = Instant::now();
        f(reports);
        timing.insert(name.to_string(), t.elapsed().as_millis() as u64);
    };
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Axioms) {
        timed("axioms", &mut reports, &mut |out| out.push(validate_brace(&b, check)));
    }
    if want(Suite::Properties) {
        timed("properties", &mut reports, &mut |out| {
            match properties_report(&b, opts.depth, check) {
                Ok(r) => out.push(r),
                Err(e) => out.push(error_report("properties", "descent", &e)),
            }
            let k = BuildParams::new(b.group(), opts.k).map_or(1, |p| p.k);
            match uniform_report(&b, k, None, check) {
                Ok(r) => out.push(r),
                Err(e) => out.push(error_report("uniform", "uniform", &e)),
            }
        });
    }
    if want(Suite::Filtration) {
        timed("filtration", &mut reports, &mut |out| match verify_ideal_lattice(&b, check) {
            Ok(r) => out.push(r),
            Err(e) => out.push(error_report("ideal-lattice", "lattice", &e)),
        });
    }
    let mut built = None;
    if want(Suite::Prelie) || want(Suite::Flows) {
        let mut tmp = Vec::new();
        timed("prelie", &mut reports, &mut |out| {
            built = prelie_reports(&b, opts, &mut tmp);
            if want(Suite::Prelie) {
                out.append(&mut tmp);
            }
        });
    }
    if want(Suite::Flows) {
        timed("flows", &mut reports, &mut |out| flows_reports(&b, built.as_ref(), opts, out));
    }
    let passed = reports.iter().all(Report::passed);
    Ok(SuiteResult {
        suite,
        brace: format!("{} on {}", b.kind(), b.group().describe()),
        passed,
        check: *check,
        reports,
        timing_ms: timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_validate() {
        assert_eq!(gen_trivial(5, &[1]).unwrap().order(), 5);
        assert!(gen_ring_brace(5, 4, 1).unwrap().is_validated());
        match gen_ring_brace(5, 4, 0) {
            Err(Error::NotABrace { witness, .. }) => assert_eq!(witness, vec![vec![624]]),
            other => panic!("{other:?}"),
        }
        let h = gen_heisenberg(5).unwrap();
        let z = GroupElement::from_slice(&[0, 0]);
        assert!(h.star(&GroupElement::from_slice(&[0, 1]), &z).is_zero());
        let t = gen_trivial(5, &[1]).unwrap();
        let prod = gen_direct_product(&gen_ring_brace(5, 2, 1).unwrap(), &t).unwrap();
        assert_eq!(prod.order(), 125);
        assert!(gen_direct_product(&t, &gen_trivial(7, &[1]).unwrap()).is_err());
    }

    /// All `λ: Z/p → units` with `λ_a(b) = u_a b`, filtered by the brace
    /// identity `λ_{a+λ_a(b)} = λ_a λ_b`.
    fn unit_map_oracle(p: u64) -> usize {
        let total = (p - 1).pow(p as u32);
        (0..total)
            .filter(|&code| {
                let u: Vec<u64> = (0..p).map(|i| (code / (p - 1).pow(i as u32)) % (p - 1) + 1).collect();
                (0..p).all(|a| (0..p).all(|b| u[((a + u[a as usize] * b) % p) as usize] == u[a as usize] * u[b as usize] % p))
                    && u[0] == 1
            })
            .count()
    }

    #[test]
    fn enumeration_matches_oracle() {
        let e = enumerate_small(5, &[1], 1_000_000).unwrap();
        assert!(e.complete);
        assert_eq!(e.count, 1);
        assert_eq!(unit_map_oracle(5), 1);
        assert!(enumerate_small(11, &[1], 10).is_err());
        assert!(enumerate_small(5, &[2, 1], 10).is_err());
    }

    #[test]
    fn enumeration_z9_against_brute_force() {
        // λ_a(b) = u_a b with u_a ∈ {1, 4, 7}, the units of order a power of 3
        let units = [1u64, 4, 7];
        let mut count = 0;
        for code in 0..3u64.pow(8) {
            let mut u = vec![1u64];
            u.extend((0..8).map(|i| units[((code / 3u64.pow(i)) % 3) as usize]));
            if (0..9usize).all(|a| (0..9usize).all(|b| u[((a as u64 + u[a] * b as u64) % 9) as usize] == u[a] * u[b] % 9)) {
                count += 1;
            }
        }
        let e = enumerate_small(3, &[2], 1_000_000).unwrap();
        assert_eq!(e.count, count);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_small(3, &[1, 1], 1_000_000).unwrap();
        let b = enumerate_small(3, &[1, 1], 1_000_000).unwrap();
        assert!(a.complete);
        assert_eq!(a.count, b.count);
        let docs = |e: &Enumeration| e.braces.iter().map(|b| BraceDocument::from_brace(b).unwrap().to_json()).collect::<Vec<_>>();
        assert_eq!(docs(&a), docs(&b));
        let partial = enumerate_small(3, &[1, 1], 3).unwrap();
        assert!(!partial.complete);
    }

    #[test]
    fn documents_round_trip() {
        let docs = [
            BraceDocument::new(5, &[4], BraceOp::Ring { s: 1 }),
            BraceDocument::new(5, &[1, 1], BraceOp::Heisenberg),
            BraceDocument::new(5, &[2], BraceOp::Trivial),
            BraceDocument::from_brace(&gen_heisenberg(3).unwrap().tabulated().unwrap()).unwrap(),
        ];
        for d in &docs {
            let text = d.to_json();
            let back = BraceDocument::from_json(&text).unwrap();
            assert_eq!(back.to_json(), text);
            back.to_brace().unwrap();
        }
        assert_eq!(docs[0].to_json(), r#"{"format":"brace-v1","p":5,"exponents":[4],"op":{"kind":"ring","s":1}}"#);
    }

    #[test]
    fn bad_documents() {
        let d = BraceDocument::new(5, &[4], BraceOp::Ring { s: 0 });
        assert!(matches!(d.to_brace(), Err(Error::NotABrace { .. })));
        let d = BraceDocument::new(3, &[1], BraceOp::StarTable { table: vec![vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 0]] });
        assert!(matches!(d.to_brace(), Err(Error::NotABrace { .. })));
        let d = BraceDocument::new(3, &[1], BraceOp::StarTable { table: vec![vec![0, 0]] });
        assert!(matches!(d.to_brace(), Err(Error::Document(_))));
        assert!(BraceDocument::from_json(r#"{"format":"brace-v1"}"#).is_err());
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn flows_document() {
        let c = PrimePowerGroup::new(5, &[2]).unwrap();
        let t: Vec<u32> = (0..625u64).map(|k| (20 * (k / 25) * (k % 25) % 25) as u32).collect();
        let ring = PreLieRing::from_table(&c, t, Provenance::External).unwrap();
        let doc = BraceDocument::flows(&ring).unwrap();
        let b = BraceDocument::from_json(&doc.to_json()).unwrap().to_brace().unwrap();
        let one = GroupElement::from_slice(&[1]);
        assert_eq!(b.circle(&one, &one), GroupElement::from_slice(&[22]));
    }

    #[test]
    fn suites() {
        let heis = BraceDocument::new(5, &[1, 1], BraceOp::Heisenberg);
        let r = run_suite(&heis, Suite::Properties, &SuiteOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.failures().iter().any(|f| f == "properties/property_1'"));
        let triv = BraceDocument::new(5, &[3], BraceOp::Trivial);
        let r = run_suite(&triv, Suite::All, &SuiteOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        let again = run_suite(&triv, Suite::All, &SuiteOptions::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&r.untimed()).unwrap(),
            serde_json::to_string(&again.untimed()).unwrap()
        );
    }
}
