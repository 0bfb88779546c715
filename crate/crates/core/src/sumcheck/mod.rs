//! SumCheck prover and verifier over a [`CompositePoly`].
//!
//! Each round sends `s_i(0..=d)`. Per pair of table entries the prover
//! extends every factor MLE to the points a term needs, multiplies the
//! extensions across the term's factors and accumulates per point. Terms of
//! lower degree are evaluated at `d_t + 1` points only and then extended to
//! `d + 1` points by forward differences.

mod zerocheck;

use rayon::prelude::*;
use thiserror::Error;

use crate::binding::{Binding, BindingError};
use crate::field::Fr;
use crate::gates::{CompositePoly, GateError, Role, Scalars};
use crate::mle::{build_eq_mle, eq_eval, extend_pair_into, fold_pair};
use crate::transcript::Transcript;

pub use zerocheck::{
    prove_gate, squeeze_scalars, verify_gate, zerocheck_prove, zerocheck_verify, GateProof,
    ProofKind, ZEROCHECK_EQ_ID,
};

/// Pairs handled per parallel work item.
const CHUNK_PAIRS: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SumcheckError {
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("SumCheck needs at least one variable")]
    NoVariables,
    #[error("gate already carries an eq factor `{0}`")]
    EqFactorPresent(String),
    #[error("gate has no terms")]
    EmptyGate,
}

/// Why a verifier rejected a proof.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Reject {
    #[error("round {round}: s(0)+s(1) = {actual}, expected {expected}")]
    RoundSum {
        round: usize,
        expected: Fr,
        actual: Fr,
    },
    #[error("final check: composite = {actual}, expected {expected}")]
    FinalEval { expected: Fr, actual: Fr },
    #[error("claim must be zero, got {0}")]
    ClaimNotZero(Fr),
    #[error("grand product root is {0}, expected 1")]
    RootNotOne(Fr),
    #[error("malformed proof: {0}")]
    Malformed(String),
}

/// `s_i` sampled at `0..=d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPoly {
    pub evals: Vec<Fr>,
}

impl RoundPoly {
    pub fn degree(&self) -> usize {
        self.evals.len().saturating_sub(1)
    }

    pub fn evaluate(&self, r: Fr) -> Fr {
        evaluate_round_poly(&self.evals, r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumcheckProof {
    pub claim: Fr,
    pub rounds: Vec<RoundPoly>,
    pub final_point: Vec<Fr>,
    /// Each input folded to a scalar at `final_point`, in gate input order.
    pub final_evals: Vec<(String, Fr)>,
}

impl SumcheckProof {
    pub fn num_vars(&self) -> usize {
        self.rounds.len()
    }

    pub fn final_eval(&self, id: &str) -> Option<Fr> {
        self.final_evals
            .iter()
            .find(|(k, _)| k == id)
            .map(|(_, v)| *v)
    }
}

/// Operation counts for one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundCounters {
    pub pairs: u64,
    /// Additions and subtractions spent extending pairs.
    pub ext_adds: u64,
    /// Multiplications across a term's factors.
    pub product_muls: u64,
    /// Coefficient scaling of per-term accumulators.
    pub coeff_muls: u64,
    /// Folds of every table before this round ran.
    pub update_muls: u64,
}

impl RoundCounters {
    fn add(&mut self, o: &RoundCounters) {
        self.pairs += o.pairs;
        self.ext_adds += o.ext_adds;
        self.product_muls += o.product_muls;
        self.coeff_muls += o.coeff_muls;
        self.update_muls += o.update_muls;
    }

    pub fn muls(&self) -> u64 {
        self.product_muls + self.coeff_muls + self.update_muls
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProverStats {
    pub rounds: Vec<RoundCounters>,
    /// Folds after the last round, producing the final evaluations.
    pub final_update_muls: u64,
    /// Multiplications spent building the ZeroCheck eq table.
    pub eq_muls: u64,
    /// Length of every bound table after each round's update.
    pub table_len_after_round: Vec<usize>,
}

impl ProverStats {
    pub fn total_muls(&self) -> u64 {
        self.rounds.iter().map(RoundCounters::muls).sum::<u64>()
            + self.final_update_muls
            + self.eq_muls
    }

    pub fn total_product_muls(&self) -> u64 {
        self.rounds.iter().map(|r| r.product_muls).sum()
    }

    pub fn total_update_muls(&self) -> u64 {
        self.rounds.iter().map(|r| r.update_muls).sum::<u64>() + self.final_update_muls
    }
}

/// How the verifier obtains input values at the final point.
#[derive(Debug, Clone, Copy)]
pub enum FinalCheck<'a> {
    /// Re-evaluate the committed tables.
    Direct(&'a Binding),
    /// Use the prover's `final_evals`.
    Trusting,
}

/// Lagrange interpolation through `(k, evals[k])`, `k = 0..=d`, evaluated at `r`.
pub fn evaluate_round_poly(evals: &[Fr], r: Fr) -> Fr {
    let d = match evals.len() {
        0 => return Fr::ZERO,
        n => n - 1,
    };
    if let Some(k) = r.as_u64() {
        if (k as usize) <= d {
            return evals[k as usize];
        }
    }
    // barycentric form: L(r) = Π(r - m) Σ_j w_j e_j / (r - j)
    let weights = barycentric_weights(d);
    let diffs: Vec<Fr> = (0..=d).map(|j| r - Fr::from(j as u64)).collect();
    let full: Fr = diffs.iter().copied().product();
    let inv = crate::field::batch_inverse_all(&diffs).expect("r is not a node");
    let sum: Fr = evals
        .iter()
        .zip(&weights)
        .zip(&inv)
        .map(|((e, w), i)| *e * *w * *i)
        .sum();
    full * sum
}

/// `w_j = 1 / Π_{m≠j} (j - m)` for nodes `0..=d`.
pub fn barycentric_weights(d: usize) -> Vec<Fr> {
    let mut fact = vec![Fr::ONE; d + 1];
    for i in 1..=d {
        fact[i] = fact[i - 1] * Fr::from(i as u64);
    }
    (0..=d)
        .map(|j| {
            let den = fact[j] * fact[d - j];
            let w = den.inverse().expect("factorials are nonzero below p");
            if (d - j) % 2 == 1 {
                -w
            } else {
                w
            }
        })
        .collect()
}

/// Resolved term: coefficient, `(slot, multiplicity)` factors and degree.
struct PlanTerm {
    coeff: Fr,
    factors: Vec<(usize, usize)>,
    degree: usize,
}

struct Plan {
    terms: Vec<PlanTerm>,
    degree: usize,
    /// Highest extension point each table must reach.
    need: Vec<usize>,
}

impl Plan {
    fn new(poly: &CompositePoly, coeffs: &[Fr]) -> Plan {
        let mut need = vec![0usize; poly.inputs.len()];
        let terms: Vec<PlanTerm> = poly
            .terms
            .iter()
            .zip(coeffs)
            .map(|(t, c)| {
                let d = t.degree();
                for &f in &t.factors {
                    need[f] = need[f].max(d);
                }
                PlanTerm {
                    coeff: *c,
                    factors: t.factor_counts(),
                    degree: d,
                }
            })
            .collect();
        Plan {
            terms,
            degree: poly.degree(),
            need,
        }
    }

    /// Per-term accumulators over pairs `lo..hi`.
    fn accumulate(
        &self,
        tables: &[Vec<Fr>],
        lo: usize,
        hi: usize,
    ) -> (Vec<Vec<Fr>>, RoundCounters) {
        let mut acc: Vec<Vec<Fr>> = self
            .terms
            .iter()
            .map(|t| vec![Fr::ZERO; t.degree + 1])
            .collect();
        let mut ext: Vec<Vec<Fr>> = self
            .need
            .iter()
            .map(|&n| Vec::with_capacity(n + 1))
            .collect();
        let mut c = RoundCounters {
            pairs: (hi - lo) as u64,
            ..Default::default()
        };
        for j in lo..hi {
            for (s, t) in tables.iter().enumerate() {
                if self.need[s] > 0 {
                    extend_pair_into(t[2 * j], t[2 * j + 1], self.need[s], &mut ext[s]);
                    c.ext_adds += self.need[s] as u64;
                }
            }
            for (t, a) in self.terms.iter().zip(acc.iter_mut()) {
                if t.degree == 0 {
                    a[0] += Fr::ONE;
                    continue;
                }
                for (k, slot) in a.iter_mut().enumerate() {
                    let mut first = true;
                    let mut v = Fr::ZERO;
                    for &(s, m) in &t.factors {
                        for _ in 0..m {
                            if first {
                                v = ext[s][k];
                                first = false;
                            } else {
                                v *= ext[s][k];
                                c.product_muls += 1;
                            }
                        }
                    }
                    *slot += v;
                }
            }
        }
        (acc, c)
    }

    /// Scales per-term accumulators and extends them to `0..=d`.
    fn combine(&self, acc: &[Vec<Fr>], c: &mut RoundCounters) -> Vec<Fr> {
        let mut out = vec![Fr::ZERO; self.degree + 1];
        for (t, a) in self.terms.iter().zip(acc) {
            let scaled: Vec<Fr> = a.iter().map(|v| *v * t.coeff).collect();
            c.coeff_muls += scaled.len() as u64;
            for (k, v) in forward_extend(&scaled, self.degree).into_iter().enumerate() {
                out[k] += v;
            }
        }
        out
    }
}

/// Extends samples of a degree-`len-1` polynomial at `0..len` to `0..=d`,
/// using additions only.
pub fn forward_extend(samples: &[Fr], d: usize) -> Vec<Fr> {
    let n = samples.len();
    let mut diffs = samples.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            diffs[i] = diffs[i] - diffs[i - 1];
        }
    }
    // diffs[j] is now the j-th forward difference at 0
    let mut out = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        out.push(diffs[0]);
        for j in 0..n.saturating_sub(1) {
            let next = diffs[j + 1];
            diffs[j] += next;
        }
    }
    out
}

fn fold_all(tables: &mut [Vec<Fr>], r: Fr) -> u64 {
    tables
        .par_iter_mut()
        .map(|t| {
            let half = t.len() / 2;
            for k in 0..half {
                t[k] = fold_pair(t[2 * k], t[2 * k + 1], r);
            }
            t.truncate(half);
            half as u64
        })
        .sum()
}

/// Absorbs the statement: gate fingerprint and number of variables.
pub fn absorb_statement(transcript: &mut Transcript, poly: &CompositePoly, num_vars: usize) {
    transcript.absorb_bytes("gate", &poly.fingerprint());
    transcript.absorb_u64("num_vars", num_vars as u64);
}

/// Runs the prover on owned tables in gate input order.
pub(crate) fn prove_tables(
    poly: &CompositePoly,
    mut tables: Vec<Vec<Fr>>,
    coeffs: &[Fr],
    transcript: &mut Transcript,
) -> (SumcheckProof, ProverStats) {
    let num_vars = tables[0].len().trailing_zeros() as usize;
    let plan = Plan::new(poly, coeffs);
    let mut stats = ProverStats::default();
    let mut rounds = Vec::with_capacity(num_vars);
    let mut point = Vec::with_capacity(num_vars);
    let mut pending_update = 0u64;
    let mut claim = Fr::ZERO;

    for round in 0..num_vars {
        let pairs = tables[0].len() / 2;
        let chunks: Vec<(usize, usize)> = (0..pairs)
            .step_by(CHUNK_PAIRS)
            .map(|lo| (lo, (lo + CHUNK_PAIRS).min(pairs)))
            .collect();
        let partials: Vec<(Vec<Vec<Fr>>, RoundCounters)> = chunks
            .par_iter()
            .map(|&(lo, hi)| plan.accumulate(&tables, lo, hi))
            .collect();
        let mut counters = RoundCounters {
            update_muls: pending_update,
            ..Default::default()
        };
        let mut acc: Vec<Vec<Fr>> = plan
            .terms
            .iter()
            .map(|t| vec![Fr::ZERO; t.degree + 1])
            .collect();
        for (part, c) in &partials {
            counters.add(c);
            for (a, p) in acc.iter_mut().zip(part) {
                for (x, y) in a.iter_mut().zip(p) {
                    *x += *y;
                }
            }
        }
        let evals = plan.combine(&acc, &mut counters);
        if round == 0 {
            claim = evals[0] + evals[1];
            transcript.absorb_field("claim", &claim);
        }
        transcript.absorb_fields("round", &evals);
        let r = transcript.challenge("r");
        pending_update = fold_all(&mut tables, r);
        stats.table_len_after_round.push(tables[0].len());
        stats.rounds.push(counters);
        rounds.push(RoundPoly { evals });
        point.push(r);
    }
    stats.final_update_muls = pending_update;
    let final_evals = poly
        .inputs
        .iter()
        .zip(&tables)
        .map(|(m, t)| (m.id.clone(), t[0]))
        .collect();
    (
        SumcheckProof {
            claim,
            rounds,
            final_point: point,
            final_evals,
        },
        stats,
    )
}

/// Plain SumCheck of `Σ_x p(x)` with the tables in `binding`.
pub fn prove(
    poly: &CompositePoly,
    binding: &Binding,
    scalars: &Scalars,
    transcript: &mut Transcript,
) -> Result<(SumcheckProof, ProverStats), SumcheckError> {
    if binding.num_vars() == 0 {
        return Err(SumcheckError::NoVariables);
    }
    if poly.terms.is_empty() {
        return Err(SumcheckError::EmptyGate);
    }
    let coeffs = poly.term_coeffs(scalars)?;
    let tables: Vec<Vec<Fr>> = binding
        .resolve(poly)?
        .into_iter()
        .map(|m| m.evals().to_vec())
        .collect();
    absorb_statement(transcript, poly, binding.num_vars());
    Ok(prove_tables(poly, tables, &coeffs, transcript))
}

fn check_shape(poly: &CompositePoly, proof: &SumcheckProof) -> Result<usize, Reject> {
    let mu = proof.rounds.len();
    if mu == 0 {
        return Err(Reject::Malformed("no rounds".into()));
    }
    if proof.final_point.len() != mu {
        return Err(Reject::Malformed(format!(
            "final point has {} coordinates, expected {mu}",
            proof.final_point.len()
        )));
    }
    let d = poly.degree();
    if let Some((i, r)) = proof
        .rounds
        .iter()
        .enumerate()
        .find(|(_, r)| r.evals.len() != d + 1)
    {
        return Err(Reject::Malformed(format!(
            "round {} has {} evaluations, expected {}",
            i + 1,
            r.evals.len(),
            d + 1
        )));
    }
    Ok(mu)
}

/// Replays the rounds; returns the challenges and the final expected value.
fn replay_rounds(
    proof: &SumcheckProof,
    transcript: &mut Transcript,
) -> Result<(Vec<Fr>, Fr), Reject> {
    transcript.absorb_field("claim", &proof.claim);
    let mut expected = proof.claim;
    let mut point = Vec::with_capacity(proof.rounds.len());
    for (i, rp) in proof.rounds.iter().enumerate() {
        let actual = rp.evals[0] + rp.evals[1];
        if actual != expected {
            return Err(Reject::RoundSum {
                round: i + 1,
                expected,
                actual,
            });
        }
        transcript.absorb_fields("round", &rp.evals);
        let r = transcript.challenge("r");
        if proof.final_point[i] != r {
            return Err(Reject::Malformed(format!(
                "final point coordinate {} does not match the transcript",
                i + 1
            )));
        }
        expected = rp.evaluate(r);
        point.push(r);
    }
    Ok((point, expected))
}

/// Input values at the final point; `eq` supplies any verifier-computed inputs.
fn final_values(
    poly: &CompositePoly,
    proof: &SumcheckProof,
    point: &[Fr],
    mode: FinalCheck<'_>,
    eq: Option<(usize, Fr)>,
) -> Result<Vec<Fr>, Reject> {
    poly.inputs
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if let Some((idx, v)) = eq {
                if idx == i {
                    return Ok(v);
                }
            }
            match mode {
                FinalCheck::Direct(b) => {
                    let t = b.get(&m.id).ok_or_else(|| {
                        Reject::Malformed(format!("no committed table for `{}`", m.id))
                    })?;
                    t.evaluate(point)
                        .map_err(|e| Reject::Malformed(e.to_string()))
                }
                FinalCheck::Trusting => proof.final_eval(&m.id).ok_or_else(|| {
                    Reject::Malformed(format!("missing final evaluation for `{}`", m.id))
                }),
            }
        })
        .collect()
}

pub(crate) fn verify_inner(
    poly: &CompositePoly,
    proof: &SumcheckProof,
    scalars: &Scalars,
    transcript: &mut Transcript,
    mode: FinalCheck<'_>,
    eq: Option<(usize, &[Fr])>,
) -> Result<(), Reject> {
    let mu = check_shape(poly, proof)?;
    if let FinalCheck::Direct(b) = mode {
        if b.num_vars() != mu {
            return Err(Reject::Malformed(format!(
                "binding has {} variables, proof has {mu}",
                b.num_vars()
            )));
        }
    }
    absorb_statement(transcript, poly, mu);
    let (point, expected) = replay_rounds(proof, transcript)?;
    let eq_val = eq.map(|(idx, tau)| (idx, eq_eval(&point, tau)));
    let values = final_values(poly, proof, &point, mode, eq_val)?;
    let actual = poly
        .evaluate_values(&values, scalars)
        .map_err(|e| Reject::Malformed(e.to_string()))?;
    if actual != expected {
        return Err(Reject::FinalEval { expected, actual });
    }
    Ok(())
}

/// Verifies a plain SumCheck proof for `poly`.
pub fn verify(
    poly: &CompositePoly,
    proof: &SumcheckProof,
    scalars: &Scalars,
    transcript: &mut Transcript,
    mode: FinalCheck<'_>,
) -> Result<(), Reject> {
    verify_inner(poly, proof, scalars, transcript, mode, None)
}

/// Builds the eq table for `tau`, returning it with its multiplication count.
pub(crate) fn eq_table(tau: &[Fr]) -> (Vec<Fr>, u64) {
    let m = build_eq_mle(tau);
    (m.into_evals(), (1u64 << tau.len()) - 1)
}

pub(crate) fn has_eq_input(poly: &CompositePoly) -> Option<&str> {
    poly.inputs
        .iter()
        .find(|m| m.role == Role::Eq)
        .map(|m| m.id.as_str())
}
