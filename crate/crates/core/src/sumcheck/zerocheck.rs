//! ZeroCheck wrapper and gate-level entry points.

use crate::binding::Binding;
use crate::field::Fr;
use crate::gates::{CompositePoly, Scalars};
use crate::transcript::Transcript;

use super::{
    absorb_statement, eq_table, has_eq_input, prove, prove_tables, verify, verify_inner,
    FinalCheck, ProverStats, Reject, SumcheckError, SumcheckProof,
};

/// Id given to the eq table appended by [`zerocheck_prove`].
pub const ZEROCHECK_EQ_ID: &str = "f_r";

/// Which protocol produced a proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofKind {
    Plain,
    ZeroCheck,
    /// PermCheck; `root` is the claimed grand product.
    PermCheck {
        root: Fr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateProof {
    pub kind: ProofKind,
    pub proof: SumcheckProof,
}

/// Squeezes one transcript challenge per named scalar, in declaration order.
pub fn squeeze_scalars(poly: &CompositePoly, transcript: &mut Transcript) -> Scalars {
    poly.challenges
        .iter()
        .map(|name| (name.clone(), transcript.challenge("scalar")))
        .collect()
}

fn zerocheck_statement(
    full: &CompositePoly,
    num_vars: usize,
    transcript: &mut Transcript,
) -> Vec<Fr> {
    transcript.absorb_bytes("zerocheck", &full.fingerprint());
    transcript.absorb_u64("num_vars", num_vars as u64);
    transcript.challenges("tau", num_vars)
}

pub(crate) fn zerocheck_prove_named(
    body: &CompositePoly,
    eq_id: &str,
    binding: &Binding,
    scalars: &Scalars,
    transcript: &mut Transcript,
) -> Result<(SumcheckProof, ProverStats), SumcheckError> {
    if let Some(id) = has_eq_input(body) {
        return Err(SumcheckError::EqFactorPresent(id.to_string()));
    }
    let mu = binding.num_vars();
    if mu == 0 {
        return Err(SumcheckError::NoVariables);
    }
    if body.terms.is_empty() {
        return Err(SumcheckError::EmptyGate);
    }
    let coeffs = body.term_coeffs(scalars)?;
    let mut tables: Vec<Vec<Fr>> = binding
        .resolve(body)?
        .into_iter()
        .map(|m| m.evals().to_vec())
        .collect();
    let full = body.with_eq_factor(eq_id);
    let tau = zerocheck_statement(&full, mu, transcript);
    let (eq, eq_muls) = eq_table(&tau);
    tables.push(eq);
    absorb_statement(transcript, &full, mu);
    let (proof, mut stats) = prove_tables(&full, tables, &coeffs, transcript);
    stats.eq_muls = eq_muls;
    Ok((proof, stats))
}

/// Proves `Σ_x body(x)·eq(x, τ) = 0` with `τ` drawn from the transcript.
pub fn zerocheck_prove(
    body: &CompositePoly,
    binding: &Binding,
    scalars: &Scalars,
    transcript: &mut Transcript,
) -> Result<(SumcheckProof, ProverStats), SumcheckError> {
    zerocheck_prove_named(body, ZEROCHECK_EQ_ID, binding, scalars, transcript)
}

pub(crate) fn zerocheck_verify_named(
    body: &CompositePoly,
    eq_id: &str,
    proof: &SumcheckProof,
    scalars: &Scalars,
    transcript: &mut Transcript,
    mode: FinalCheck<'_>,
) -> Result<(), Reject> {
    let full = body.with_eq_factor(eq_id);
    let tau = zerocheck_statement(&full, proof.num_vars(), transcript);
    if !proof.claim.is_zero() {
        return Err(Reject::ClaimNotZero(proof.claim));
    }
    let idx = full.inputs.len() - 1;
    verify_inner(&full, proof, scalars, transcript, mode, Some((idx, &tau)))
}

/// Verifies a proof from [`zerocheck_prove`]; the verifier computes `eq(r, τ)` itself.
pub fn zerocheck_verify(
    body: &CompositePoly,
    proof: &SumcheckProof,
    scalars: &Scalars,
    transcript: &mut Transcript,
    mode: FinalCheck<'_>,
) -> Result<(), Reject> {
    zerocheck_verify_named(body, ZEROCHECK_EQ_ID, proof, scalars, transcript, mode)
}

/// Proves a gate: ZeroCheck when it has the eq-factor shape, plain SumCheck otherwise.
///
/// Named challenges are squeezed after the statement is absorbed.
pub fn prove_gate(
    gate: &CompositePoly,
    binding: &Binding,
    transcript: &mut Transcript,
) -> Result<(GateProof, ProverStats), SumcheckError> {
    absorb_statement(transcript, gate, binding.num_vars());
    let scalars = squeeze_scalars(gate, transcript);
    match gate.zerocheck_factor() {
        Some(idx) => {
            let body = gate.zerocheck_body().expect("zerocheck shape");
            let (proof, stats) =
                zerocheck_prove_named(&body, &gate.inputs[idx].id, binding, &scalars, transcript)?;
            Ok((
                GateProof {
                    kind: ProofKind::ZeroCheck,
                    proof,
                },
                stats,
            ))
        }
        None => {
            let (proof, stats) = prove(gate, binding, &scalars, transcript)?;
            Ok((
                GateProof {
                    kind: ProofKind::Plain,
                    proof,
                },
                stats,
            ))
        }
    }
}

pub fn verify_gate(
    gate: &CompositePoly,
    gp: &GateProof,
    transcript: &mut Transcript,
    mode: FinalCheck<'_>,
) -> Result<(), Reject> {
    absorb_statement(transcript, gate, gp.proof.num_vars());
    let scalars = squeeze_scalars(gate, transcript);
    match (gate.zerocheck_factor(), gp.kind) {
        (Some(idx), ProofKind::ZeroCheck) => {
            let body = gate.zerocheck_body().expect("zerocheck shape");
            zerocheck_verify_named(
                &body,
                &gate.inputs[idx].id,
                &gp.proof,
                &scalars,
                transcript,
                mode,
            )
        }
        (None, ProofKind::Plain) => verify(gate, &gp.proof, &scalars, transcript, mode),
        (_, kind) => Err(Reject::Malformed(format!(
            "proof kind {kind:?} does not match gate `{}`",
            gate.name
        ))),
    }
}
