use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phire_core::gates::BUILTIN_IDS;
use phire_core::io::{decode_perm_instance, decode_proof, encode_perm_instance, encode_proof};
use phire_core::permcheck::{permcheck_prove, permcheck_verify, PermInstance, PermVerifyMode};
use phire_core::sumcheck::{prove_gate, verify_gate};
use phire_core::witness::satisfying_binding;
use phire_core::{builtin_gate, FinalCheck, ProofKind, Reject, Transcript};

#[test]
fn every_gate_round_trips_through_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for id in BUILTIN_IDS {
        let gate = builtin_gate(id).unwrap();
        let b = satisfying_binding(id, 5, &mut rng);
        let (gp, _) = prove_gate(&gate, &b, &mut Transcript::new(b"rt")).unwrap();
        let (header, back) = decode_proof(&encode_proof(&gate, &gp)).unwrap();
        assert!(header.matches(&gate));
        assert_eq!(back, gp);
        verify_gate(
            &gate,
            &back,
            &mut Transcript::new(b"rt"),
            FinalCheck::Direct(&b),
        )
        .unwrap();
        verify_gate(
            &gate,
            &back,
            &mut Transcript::new(b"rt"),
            FinalCheck::Trusting,
        )
        .unwrap();
    }
}

#[test]
fn proofs_are_deterministic() {
    let id = BUILTIN_IDS[20];
    let gate = builtin_gate(id).unwrap();
    let run = || {
        let b = satisfying_binding(id, 8, &mut ChaCha8Rng::seed_from_u64(7));
        let (gp, _) = prove_gate(&gate, &b, &mut Transcript::new(b"det")).unwrap();
        encode_proof(&gate, &gp)
    };
    assert_eq!(run(), run());
}

#[test]
fn transcript_domain_separates() {
    let id = BUILTIN_IDS[1];
    let gate = builtin_gate(id).unwrap();
    let b = satisfying_binding(id, 4, &mut ChaCha8Rng::seed_from_u64(1));
    let (gp, _) = prove_gate(&gate, &b, &mut Transcript::new(b"one")).unwrap();
    let r = verify_gate(
        &gate,
        &gp,
        &mut Transcript::new(b"two"),
        FinalCheck::Direct(&b),
    );
    assert!(r.is_err());
}

#[test]
fn wrong_kind_is_malformed() {
    let id = BUILTIN_IDS[20];
    let gate = builtin_gate(id).unwrap();
    let b = satisfying_binding(id, 3, &mut ChaCha8Rng::seed_from_u64(2));
    let (mut gp, _) = prove_gate(&gate, &b, &mut Transcript::new(b"k")).unwrap();
    gp.kind = ProofKind::Plain;
    let r = verify_gate(&gate, &gp, &mut Transcript::new(b"k"), FinalCheck::Trusting);
    assert!(matches!(r, Err(Reject::Malformed(_))));
}

#[test]
fn permcheck_through_files() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = PermInstance::random_valid(4, 6, &mut rng);
    let inst = decode_perm_instance(&encode_perm_instance(&inst)).unwrap();
    let (gp, _) = permcheck_prove(&inst, &mut Transcript::new(b"p")).unwrap();
    let gate = phire_core::permcheck::permcheck_gate(4);
    let (_, back) = decode_proof(&encode_proof(&gate, &gp)).unwrap();
    permcheck_verify(
        &inst,
        &back,
        &mut Transcript::new(b"p"),
        PermVerifyMode::Rebuild,
    )
    .unwrap();
    permcheck_verify(
        &inst,
        &back,
        &mut Transcript::new(b"p"),
        PermVerifyMode::Trusting,
    )
    .unwrap();
}
