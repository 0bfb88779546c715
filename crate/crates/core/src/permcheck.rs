//! Wire-identity tables: numerators, denominators, fraction and product tree.
//!
//! Cell `(i, x)` of column `i` carries identity label `i * 2^μ + x`. With
//! challenges `β, γ`:
//!
//! ```text
//! N_i[x] = w_i[x] + β·id_i[x] + γ      D_i[x] = w_i[x] + β·σ_i[x] + γ
//! φ[x]   = Π_i N_i[x] / Π_i D_i[x]
//! ```
//!
//! The product tree is stored as `v` of length `2N`: `v[0..N] = φ`,
//! `v[N + j] = v[2j]·v[2j+1]`, `v[2N-1] = 0`. Then `π[j] = v[N + j]`,
//! `p1[j] = v[2j]`, `p2[j] = v[2j + 1]`, so `π = p1·p2` on every index and the
//! root `Π φ` sits at `π[N - 2]`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use sha3::{Digest, Sha3_256};
use thiserror::Error;

use crate::binding::Binding;
use crate::field::{batch_inverse, FieldError, Fr};
use crate::gates::{builtin_gate, parse_gate, CompositePoly, GateId};
use crate::mle::Mle;
use crate::sumcheck::{
    prove_gate, verify_gate, FinalCheck, GateProof, ProofKind, ProverStats, Reject, SumcheckError,
};
use crate::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("invalid permutation instance: {0}")]
    Instance(String),
    #[error("zero denominator at index {index}")]
    ZeroDenominator { index: usize },
    #[error("grand product root is {0}, expected 1")]
    RootNotOne(Fr),
    #[error(transparent)]
    Sumcheck(#[from] SumcheckError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Witness columns plus the wiring permutation over their cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermInstance {
    num_vars: usize,
    witnesses: Vec<Mle>,
    /// `sigma[i][x]` is the label cell `(i, x)` is wired to.
    sigma: Vec<Vec<u64>>,
}

impl PermInstance {
    pub fn new(witnesses: Vec<Mle>, sigma: Vec<Vec<u64>>) -> Result<Self, PermError> {
        let k = witnesses.len();
        if k == 0 || sigma.len() != k {
            return Err(PermError::Instance(format!(
                "{k} witness columns, {} sigma columns",
                sigma.len()
            )));
        }
        let num_vars = witnesses[0].num_vars();
        let n = 1usize << num_vars;
        if num_vars == 0 {
            return Err(PermError::Instance("need at least one variable".into()));
        }
        if witnesses.iter().any(|w| w.num_vars() != num_vars) || sigma.iter().any(|s| s.len() != n)
        {
            return Err(PermError::Instance("columns differ in size".into()));
        }
        let total = (k * n) as u64;
        let mut seen = vec![false; k * n];
        for &l in sigma.iter().flatten() {
            if l >= total || std::mem::replace(&mut seen[l as usize], true) {
                return Err(PermError::Instance(format!(
                    "sigma is not a permutation (label {l})"
                )));
            }
        }
        Ok(Self {
            num_vars,
            witnesses,
            sigma,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn k(&self) -> usize {
        self.witnesses.len()
    }

    pub fn witnesses(&self) -> &[Mle] {
        &self.witnesses
    }

    pub fn witnesses_mut(&mut self) -> &mut [Mle] {
        &mut self.witnesses
    }

    pub fn sigma(&self) -> &[Vec<u64>] {
        &self.sigma
    }

    pub fn identity_label(&self, column: usize, x: usize) -> u64 {
        ((column << self.num_vars) + x) as u64
    }

    /// Size of the σ-cycle containing cell `(column, x)`.
    pub fn orbit_len(&self, column: usize, x: usize) -> usize {
        let start = self.identity_label(column, x);
        let mut cur = self.sigma[column][x];
        let mut len = 1;
        while cur != start {
            let (c, y) = self.cell(cur);
            cur = self.sigma[c][y];
            len += 1;
        }
        len
    }

    fn cell(&self, label: u64) -> (usize, usize) {
        let n = 1u64 << self.num_vars;
        ((label / n) as usize, (label % n) as usize)
    }

    /// Whether every σ-cycle carries a single witness value.
    pub fn is_consistent(&self) -> bool {
        (0..self.k()).all(|i| {
            (0..1usize << self.num_vars).all(|x| {
                let (c, y) = self.cell(self.sigma[i][x]);
                self.witnesses[i].evals()[x] == self.witnesses[c].evals()[y]
            })
        })
    }

    /// SHA3 digest of the columns, absorbed in place of a commitment.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha3_256::new();
        h.update((self.k() as u64).to_le_bytes());
        h.update((self.num_vars as u64).to_le_bytes());
        for w in &self.witnesses {
            for e in w.evals() {
                h.update(e.to_bytes_le());
            }
        }
        for s in &self.sigma {
            for l in s {
                h.update(l.to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// Random wiring in cycles of 1 to 4 cells, witnesses constant per cycle.
    pub fn random_valid<R: Rng + ?Sized>(k: usize, num_vars: usize, rng: &mut R) -> PermInstance {
        let n = 1usize << num_vars;
        let mut cells: Vec<u64> = (0..(k * n) as u64).collect();
        cells.shuffle(rng);
        let mut sigma = vec![vec![0u64; n]; k];
        let mut w = vec![vec![Fr::ZERO; n]; k];
        let mut rest = &cells[..];
        while !rest.is_empty() {
            let len = rng.gen_range(1..=4usize).min(rest.len());
            let (group, tail) = rest.split_at(len);
            let value = Fr::random(rng);
            for (j, &label) in group.iter().enumerate() {
                let (c, x) = ((label as usize) >> num_vars, (label as usize) & (n - 1));
                sigma[c][x] = group[(j + 1) % len];
                w[c][x] = value;
            }
            rest = tail;
        }
        let witnesses = w
            .into_iter()
            .map(|v| Mle::new(v).expect("power of two"))
            .collect();
        PermInstance::new(witnesses, sigma).expect("generated permutation")
    }
}

/// Numerator and denominator columns for challenges `β, γ`.
pub fn build_num_den(inst: &PermInstance, beta: Fr, gamma: Fr) -> (Vec<Mle>, Vec<Mle>) {
    let build = |i: usize, labels: &(dyn Fn(usize) -> u64 + Sync)| {
        let evals = inst.witnesses[i]
            .evals()
            .par_iter()
            .enumerate()
            .map(|(x, w)| *w + beta * Fr::from(labels(x)) + gamma)
            .collect();
        Mle::new(evals).expect("power of two")
    };
    let num = (0..inst.k())
        .map(|i| build(i, &|x| inst.identity_label(i, x)))
        .collect();
    let den = (0..inst.k())
        .map(|i| build(i, &|x| inst.sigma[i][x]))
        .collect();
    (num, den)
}

fn column_products(cols: &[Mle]) -> Vec<Fr> {
    let n = cols[0].len();
    (0..n)
        .into_par_iter()
        .map(|x| cols.iter().map(|c| c.evals()[x]).product())
        .collect()
}

/// `φ[x] = Π N_i[x] / Π D_i[x]`, inverting the denominators in batches.
pub fn build_fraction(num: &[Mle], den: &[Mle], batch_size: usize) -> Result<Mle, PermError> {
    if num.is_empty() || num.len() != den.len() {
        return Err(PermError::Instance(
            "numerator and denominator counts differ".into(),
        ));
    }
    let n = column_products(num);
    let d = column_products(den);
    let inv = batch_inverse(&d, batch_size).map_err(|e| match e {
        FieldError::ZeroInverse { index } => PermError::ZeroDenominator { index },
        other => PermError::Field(other),
    })?;
    let phi = n.par_iter().zip(&inv).map(|(a, b)| *a * *b).collect();
    Ok(Mle::new(phi).expect("power of two"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTree {
    pub phi: Mle,
    pub pi: Mle,
    pub p1: Mle,
    pub p2: Mle,
}

impl ProductTree {
    /// `Π_x φ[x]`.
    pub fn root(&self) -> Fr {
        self.pi.evals()[self.pi.len() - 2]
    }
}

pub fn build_product_tree(phi: &Mle) -> ProductTree {
    assert!(
        phi.num_vars() >= 1,
        "product tree needs at least one variable"
    );
    let n = phi.len();
    let mut v = Vec::with_capacity(2 * n);
    v.extend_from_slice(phi.evals());
    // level by level: each level reads the previous one only
    let mut lo = 0;
    let mut width = n;
    while width > 1 {
        let next: Vec<Fr> = v[lo..lo + width]
            .par_chunks(2)
            .map(|p| p[0] * p[1])
            .collect();
        lo += width;
        width /= 2;
        v.extend(next);
    }
    v.push(Fr::ZERO);
    debug_assert_eq!(v.len(), 2 * n);
    let pi = v[n..].to_vec();
    let p1 = v.iter().step_by(2).copied().collect();
    let p2 = v.iter().skip(1).step_by(2).copied().collect();
    let mle = |e: Vec<Fr>| Mle::new(e).expect("power of two");
    ProductTree {
        phi: phi.clone(),
        pi: mle(pi),
        p1: mle(p1),
        p2: mle(p2),
    }
}

/// Wire-identity gate for `k` columns; `k = 3` and `k = 5` are the library entries.
pub fn permcheck_gate(k: usize) -> CompositePoly {
    match k {
        3 => builtin_gate(GateId::Table(21)).expect("bundled"),
        5 => builtin_gate(GateId::Table(23)).expect("bundled"),
        _ => {
            let cols = |p: &str| (1..=k).map(|i| format!("{p}_{i}")).collect::<Vec<_>>();
            let decl: Vec<String> = cols("D")
                .into_iter()
                .chain(cols("N"))
                .map(|c| format!("{c}:perm"))
                .collect();
            let text = format!(
                "gate permcheck_k{k} (inputs: pi:perm, p_1:perm, p_2:perm, phi:perm, {}, f_r:eq; \
                 challenges: alpha) {{ (pi - p_1*p_2 + alpha*(phi*{} - {}))*f_r }}",
                decl.join(", "),
                cols("D").join("*"),
                cols("N").join("*"),
            );
            parse_gate(&text).expect("generated gate")
        }
    }
}

/// Binds the tree and columns under the gate's input names.
pub fn permcheck_binding(num: Vec<Mle>, den: Vec<Mle>, tree: ProductTree) -> Binding {
    let mut b = Binding::new(tree.phi.num_vars());
    let ins = |b: &mut Binding, id: &str, m: Mle| b.insert(id, m).expect("tables share μ");
    ins(&mut b, "pi", tree.pi);
    ins(&mut b, "p_1", tree.p1);
    ins(&mut b, "p_2", tree.p2);
    ins(&mut b, "phi", tree.phi);
    for (i, m) in den.into_iter().enumerate() {
        ins(&mut b, &format!("D_{}", i + 1), m);
    }
    for (i, m) in num.into_iter().enumerate() {
        ins(&mut b, &format!("N_{}", i + 1), m);
    }
    b
}

fn absorb_instance(inst: &PermInstance, transcript: &mut Transcript) -> (Fr, Fr) {
    transcript.absorb_bytes("perm_instance", &inst.digest());
    (transcript.challenge("beta"), transcript.challenge("gamma"))
}

/// All tables the prover commits to, for challenges `β, γ`.
pub fn build_tables(inst: &PermInstance, beta: Fr, gamma: Fr) -> Result<(Binding, Fr), PermError> {
    let (num, den) = build_num_den(inst, beta, gamma);
    let phi = build_fraction(&num, &den, phi_batch(inst))?;
    let tree = build_product_tree(&phi);
    let root = tree.root();
    Ok((permcheck_binding(num, den, tree), root))
}

fn phi_batch(inst: &PermInstance) -> usize {
    (1usize << inst.num_vars).max(2)
}

/// Proves the wiring of `inst`. Fails with `RootNotOne` when the wiring is broken.
pub fn permcheck_prove(
    inst: &PermInstance,
    transcript: &mut Transcript,
) -> Result<(GateProof, ProverStats), PermError> {
    let (beta, gamma) = absorb_instance(inst, transcript);
    let (binding, root) = build_tables(inst, beta, gamma)?;
    if root != Fr::ONE {
        return Err(PermError::RootNotOne(root));
    }
    transcript.absorb_field("root", &root);
    let gate = permcheck_gate(inst.k());
    let (mut gp, stats) = prove_gate(&gate, &binding, transcript)?;
    gp.kind = ProofKind::PermCheck { root };
    Ok((gp, stats))
}

/// How the PermCheck verifier closes the final check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermVerifyMode {
    /// Rebuild N, D, φ and the tree from the instance and evaluate them.
    Rebuild,
    Trusting,
}

pub fn permcheck_verify(
    inst: &PermInstance,
    proof: &GateProof,
    transcript: &mut Transcript,
    mode: PermVerifyMode,
) -> Result<(), Reject> {
    let ProofKind::PermCheck { root } = proof.kind else {
        return Err(Reject::Malformed("not a PermCheck proof".into()));
    };
    let (beta, gamma) = absorb_instance(inst, transcript);
    if root != Fr::ONE {
        return Err(Reject::RootNotOne(root));
    }
    transcript.absorb_field("root", &root);
    let gate = permcheck_gate(inst.k());
    let inner = GateProof {
        kind: ProofKind::ZeroCheck,
        proof: proof.proof.clone(),
    };
    match mode {
        PermVerifyMode::Trusting => verify_gate(&gate, &inner, transcript, FinalCheck::Trusting),
        PermVerifyMode::Rebuild => {
            let (binding, rebuilt_root) = build_tables(inst, beta, gamma).map_err(|e| match e {
                PermError::RootNotOne(r) => Reject::RootNotOne(r),
                other => Reject::Malformed(other.to_string()),
            })?;
            if rebuilt_root != root {
                return Err(Reject::RootNotOne(rebuilt_root));
            }
            verify_gate(&gate, &inner, transcript, FinalCheck::Direct(&binding))
        }
    }
}
