//! Browser bindings: validate a brace document, evaluate brace operations,
//! and build the quotient pre-Lie ring.

use bracelab::brace::validate_brace;
use bracelab::prelie::{build_quotient_prelie, left_nilpotency_index, make_section, BuildParams, SectionPolicy};
use bracelab::workbench::BraceDocument;
use bracelab::{Brace, CheckMode};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn load(doc: &str) -> Result<Brace, String> {
    BraceDocument::from_json(doc).and_then(|d| d.to_brace()).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("values serialize")
}

pub fn validate_json(doc: &str) -> Result<String, String> {
    let doc = BraceDocument::from_json(doc).map_err(|e| e.to_string())?;
    let g = bracelab::PrimePowerGroup::new(doc.p, &doc.exponents).map_err(|e| e.to_string())?;
    let b = match doc.to_brace() {
        Ok(b) => b,
        Err(bracelab::Error::NotABrace { reason, witness }) => {
            return Ok(json(&serde_json::json!({ "passed": false, "reason": reason, "witness": witness })));
        }
        Err(e) => return Err(e.to_string()),
    };
    let report = validate_brace(&b, &CheckMode::default());
    Ok(json(&serde_json::json!({ "passed": report.passed(), "group": g.describe(), "report": report })))
}

#[derive(Serialize)]
struct Ops {
    a: Vec<u64>,
    b: Vec<u64>,
    star: Vec<u64>,
    circle: Vec<u64>,
    lambda: Vec<u64>,
    inverse: Vec<u64>,
    order: u64,
}

pub fn ops_json(doc: &str, a: u64, b: u64) -> Result<String, String> {
    let br = load(doc)?;
    let g = br.group();
    let x = g.element_at(a).map_err(|e| e.to_string())?;
    let y = g.element_at(b).map_err(|e| e.to_string())?;
    let inv = br.circle_inv(&x).map_err(|e| e.to_string())?;
    // order of a in (A,∘)
    let mut order = 1;
    let mut cur = x.clone();
    while !cur.is_zero() {
        cur = br.circle(&cur, &x);
        order += 1;
    }
    Ok(json(&Ops {
        a: x.to_vec(),
        b: y.to_vec(),
        star: br.star(&x, &y).to_vec(),
        circle: br.circle(&x, &y).to_vec(),
        lambda: br.lambda(&x, &y).to_vec(),
        inverse: inv.to_vec(),
        order,
    }))
}

#[derive(Serialize)]
struct PreLieSummary {
    k: u32,
    carrier: String,
    cosets: u64,
    one_bullet_one: Vec<u64>,
    one_odot_one: Vec<u64>,
    nilpotency_index: usize,
    notices: Vec<String>,
    /// Full `•` table for carriers of at most 49 cosets.
    bullet_table: Option<Vec<Vec<u32>>>,
}

pub fn prelie_json(doc: &str, k: u32) -> Result<String, String> {
    let b = load(doc)?;
    let mode = CheckMode::default();
    let params = BuildParams::new(b.group(), (k > 0).then_some(k)).map_err(|e| e.to_string())?;
    let s = make_section(&b, params.k, SectionPolicy::Canonical, &mode).map_err(|e| e.to_string())?;
    let qp = build_quotient_prelie(&b, &params, &s, &mode).map_err(|e| e.to_string())?;
    let q = qp.carrier();
    let n = q.order();
    let one = q.generator(0);
    let nil = left_nilpotency_index(&qp.ring()).map_err(|e| e.to_string())?;
    Ok(json(&PreLieSummary {
        k: params.k,
        carrier: q.describe(),
        cosets: n,
        one_bullet_one: qp.bullet(&one, &one).to_vec(),
        one_odot_one: qp.odot(&one, &one).to_vec(),
        nilpotency_index: nil.index,
        notices: qp.notices().to_vec(),
        bullet_table: (n <= 49).then(|| qp.bullet_table().chunks(n as usize).map(<[u32]>::to_vec).collect()),
    }))
}

#[wasm_bindgen]
pub fn validate(doc: &str) -> Result<String, JsValue> {
    validate_json(doc).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn brace_ops(doc: &str, a: u32, b: u32) -> Result<String, JsValue> {
    ops_json(doc, u64::from(a), u64::from(b)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn quotient_prelie(doc: &str, k: u32) -> Result<String, JsValue> {
    prelie_json(doc, k).map_err(|e| JsValue::from_str(&e))
}
