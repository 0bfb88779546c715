//! Witness generation, prove and verify commands.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use phire_core::io::{
    read_binding_dir, read_perm_instance, read_proof, write_binding_dir, write_perm_instance,
    write_proof,
};
use phire_core::permcheck::{
    permcheck_gate, permcheck_prove, permcheck_verify, PermInstance, PermVerifyMode,
};
use phire_core::sumcheck::{prove_gate, verify_gate};
use phire_core::witness::{committed_inputs, corrupt_entry, satisfying_binding};
use phire_core::{Binding, FinalCheck, Fr, ProofKind, Transcript};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{resolve_gate, GateSel};
use crate::error::{CliError, Result};

/// Fiat-Shamir domain used by every CLI proof.
pub const DOMAIN: &[u8] = b"phire/v1";

#[derive(Debug, Clone, Args)]
pub struct WitnessSource {
    /// Directory with one `<input>.mle` file per committed input.
    #[arg(long, conflicts_with = "seed")]
    pub witness_dir: Option<PathBuf>,
    /// Synthetic witness seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corrupt one witness entry of the synthetic witness.
    #[arg(long, requires = "seed")]
    pub violate: bool,
}

impl WitnessSource {
    fn binding(&self, gate: &GateSel, mu: usize) -> Result<Binding> {
        match (&self.witness_dir, self.seed) {
            (Some(dir), _) => {
                let ids: Vec<&str> = committed_inputs(&gate.poly)
                    .into_iter()
                    .map(|i| gate.poly.inputs[i].id.as_str())
                    .collect();
                Ok(read_binding_dir(dir, ids)?)
            }
            (None, Some(seed)) => synthetic(gate, mu, seed, self.violate),
            (None, None) => Err(CliError::Malformed("need --witness-dir or --seed".into())),
        }
    }
}

fn synthetic(gate: &GateSel, mu: usize, seed: u64, violate: bool) -> Result<Binding> {
    let id = gate.id.ok_or_else(|| {
        CliError::Malformed("synthetic witnesses exist only for built-in gates".into())
    })?;
    if mu == 0 || mu > 28 {
        return Err(CliError::Infeasible(format!("mu = {mu}, expected 1..=28")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = satisfying_binding(id, mu, &mut rng);
    if violate {
        let (input, idx) = corrupt_entry(&gate.poly, &mut b, &mut rng);
        eprintln!("corrupted {input}[{idx}]");
    }
    Ok(b)
}

#[derive(Debug, Args)]
pub struct WitnessCmd {
    #[arg(long)]
    pub gate: String,
    #[arg(long)]
    pub mu: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub violate: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn witness(c: &WitnessCmd) -> Result<()> {
    let gate = resolve_gate(&c.gate)?;
    let b = synthetic(&gate, c.mu, c.seed, c.violate)?;
    write_binding_dir(&c.out, &b)?;
    println!(
        "wrote {} tables of 2^{} to {}",
        b.ids().count(),
        c.mu,
        c.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ProveCmd {
    #[arg(long)]
    pub gate: String,
    /// Number of variables; read from the tables when a witness directory is given.
    #[arg(long, default_value_t = 12)]
    pub mu: usize,
    #[command(flatten)]
    pub witness: WitnessSource,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn prove(c: &ProveCmd) -> Result<()> {
    let gate = resolve_gate(&c.gate)?;
    let b = c.witness.binding(&gate, c.mu)?;
    let (gp, stats) = prove_gate(&gate.poly, &b, &mut Transcript::new(DOMAIN))?;
    write_proof(&c.out, &gate.poly, &gp)?;
    println!(
        "gate {} mu {} kind {:?} claim {} muls {}",
        gate.label(),
        b.num_vars(),
        gp.kind,
        gp.proof.claim,
        stats.total_muls()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Evaluate the witness tables at the final point.
    Direct,
    /// Accept the prover's final evaluations.
    Trusting,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[arg(long)]
    pub gate: String,
    #[arg(long)]
    pub proof: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Direct)]
    pub mode: Mode,
    #[command(flatten)]
    pub witness: WitnessSource,
}

pub fn verify(c: &VerifyCmd) -> Result<()> {
    let gate = resolve_gate(&c.gate)?;
    let (header, gp) = read_proof(&c.proof)?;
    if !header.matches(&gate.poly) {
        return Err(CliError::Malformed(format!(
            "proof is for gate `{}`, not `{}`",
            header.gate, gate.poly.name
        )));
    }
    let mut t = Transcript::new(DOMAIN);
    match c.mode {
        Mode::Trusting => verify_gate(&gate.poly, &gp, &mut t, FinalCheck::Trusting)?,
        Mode::Direct => {
            let b = c.witness.binding(&gate, header.num_vars)?;
            if b.num_vars() != header.num_vars {
                return Err(CliError::Malformed(format!(
                    "witness has {} variables, proof has {}",
                    b.num_vars(),
                    header.num_vars
                )));
            }
            verify_gate(&gate.poly, &gp, &mut t, FinalCheck::Direct(&b))?
        }
    }
    println!("accept");
    Ok(())
}

#[derive(Debug, Subcommand)]
pub enum PermCmd {
    /// Write a random valid wiring instance.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Change one wired cell so the instance is inconsistent.
        #[arg(long)]
        tamper: bool,
        #[arg(long)]
        out: PathBuf,
    },
    Prove {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Direct)]
        mode: Mode,
    },
}

pub fn perm(c: &PermCmd) -> Result<()> {
    match c {
        PermCmd::Gen {
            k,
            mu,
            seed,
            tamper,
            out,
        } => {
            if *k == 0 || *mu == 0 || *mu > 24 {
                return Err(CliError::Infeasible(format!("k = {k}, mu = {mu}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut inst = PermInstance::random_valid(*k, *mu, &mut rng);
            if *tamper {
                tamper_cell(&mut inst, &mut rng);
            }
            write_perm_instance(out, &inst)?;
            println!("wrote k={k} mu={mu} instance to {}", out.display());
        }
        PermCmd::Prove { instance, out } => {
            let inst = read_perm_instance(instance)?;
            let (gp, stats) = permcheck_prove(&inst, &mut Transcript::new(DOMAIN))?;
            write_proof(out, &permcheck_gate(inst.k()), &gp)?;
            println!(
                "permcheck k={} mu={} muls {}",
                inst.k(),
                inst.num_vars(),
                stats.total_muls()
            );
        }
        PermCmd::Verify {
            instance,
            proof,
            mode,
        } => {
            let inst = read_perm_instance(instance)?;
            let (header, gp) = read_proof(Path::new(proof))?;
            if !header.matches(&permcheck_gate(inst.k()))
                || !matches!(gp.kind, ProofKind::PermCheck { .. })
            {
                return Err(CliError::Malformed(
                    "not a PermCheck proof for this instance".into(),
                ));
            }
            let mode = match mode {
                Mode::Direct => PermVerifyMode::Rebuild,
                Mode::Trusting => PermVerifyMode::Trusting,
            };
            permcheck_verify(&inst, &gp, &mut Transcript::new(DOMAIN), mode)?;
            println!("accept");
        }
    }
    Ok(())
}

fn tamper_cell(inst: &mut PermInstance, rng: &mut ChaCha8Rng) {
    let n = 1usize << inst.num_vars();
    loop {
        let (c, x) = (rng.gen_range(0..inst.k()), rng.gen_range(0..n));
        if inst.orbit_len(c, x) > 1 {
            inst.witnesses_mut()[c].evals_mut()[x] += Fr::random_nonzero(rng);
            eprintln!("tampered column {c} row {x}");
            return;
        }
    }
}
