//! Synthetic bindings for the built-in gates.
//!
//! Satisfying bindings make every hypercube row of a gate evaluate to zero.
//! Inputs that carry no constraint (Spartan's second SumCheck, OpenCheck) are
//! filled at random.

use std::collections::HashMap;

use rand::Rng;

use crate::binding::Binding;
use crate::field::Fr;
use crate::gates::{builtin_gate, CompositePoly, GateId, Role};
use crate::mle::{build_eq_mle, Mle};
use crate::permcheck::{build_tables, PermInstance};

type Row = HashMap<&'static str, Fr>;

fn nonzero_diff<R: Rng + ?Sized>(rng: &mut R) -> (Fr, Fr) {
    loop {
        let (a, b) = (Fr::random_nonzero(rng), Fr::random_nonzero(rng));
        if a != b {
            return (a, b);
        }
    }
}

/// Point on `y^2 = x^3 + 5`.
fn curve_point<R: Rng + ?Sized>(rng: &mut R) -> (Fr, Fr) {
    loop {
        let x = Fr::random(rng);
        if let Some(y) = (x * x * x + Fr::from(5u64)).sqrt() {
            return (x, y);
        }
    }
}

/// One selector value: mostly 1, sometimes 0 with unconstrained witnesses.
fn selector<R: Rng + ?Sized>(rng: &mut R) -> bool {
    rng.gen_bool(0.85)
}

fn addition_row<R: Rng + ?Sized>(rng: &mut R) -> Row {
    let (x_p, x_q) = nonzero_diff(rng);
    let (y_p, y_q) = (Fr::random(rng), Fr::random(rng));
    let inv = (x_q - x_p).inverse().expect("distinct");
    let lambda = (y_q - y_p) * inv;
    let x_r = lambda.square() - x_p - x_q;
    let y_r = lambda * (x_p - x_r) - y_p;
    Row::from([
        ("x_p", x_p),
        ("y_p", y_p),
        ("x_q", x_q),
        ("y_q", y_q),
        ("x_r", x_r),
        ("y_r", y_r),
        ("lambda", lambda),
        ("alpha", inv),
        ("beta", x_p.inverse().expect("nonzero")),
        ("gamma", x_q.inverse().expect("nonzero")),
        ("delta", Fr::ZERO),
    ])
}

fn table_row<R: Rng + ?Sized>(n: u8, rng: &mut R) -> Row {
    let on = selector(rng);
    let sel = if on { Fr::ONE } else { Fr::ZERO };
    match n {
        0 => {
            let a = Fr::random(rng);
            match rng.gen_range(0..3) {
                0 => Row::from([("q_add", Fr::ONE), ("q_mul", Fr::ZERO), ("a", a), ("b", -a)]),
                1 => Row::from([
                    ("q_add", Fr::ZERO),
                    ("q_mul", Fr::ONE),
                    ("a", a),
                    ("b", Fr::ZERO),
                ]),
                _ => Row::from([
                    ("q_add", Fr::ZERO),
                    ("q_mul", Fr::ZERO),
                    ("a", a),
                    ("b", Fr::random(rng)),
                ]),
            }
        }
        1 => {
            let (a, b) = (Fr::random(rng), Fr::random(rng));
            Row::from([("A", a), ("B", b), ("C", a * b)])
        }
        3..=5 => {
            let (x, y) = if on {
                curve_point(rng)
            } else {
                (Fr::random(rng), Fr::random(rng))
            };
            Row::from([
                ("q_point_non_id", sel),
                ("q_point", sel),
                ("x", x),
                ("y", y),
            ])
        }
        6 | 7 => {
            let (x_p, x_q) = nonzero_diff(rng);
            let (y_p, y_q) = (Fr::random(rng), Fr::random(rng));
            let lambda = (y_p - y_q) * (x_p - x_q).inverse().expect("distinct");
            let x_r = lambda.square() - x_p - x_q;
            let y_r = lambda * (x_q - x_r) - y_q;
            let mut row = Row::from([
                ("x_p", x_p),
                ("y_p", y_p),
                ("x_q", x_q),
                ("y_q", y_q),
                ("x_r", x_r),
                ("y_r", y_r),
            ]);
            if !on {
                row.insert("x_r", Fr::random(rng));
            }
            row.insert("q_add_incomplete", sel);
            row
        }
        8..=19 => {
            let mut row = addition_row(rng);
            if !on {
                row.insert("x_r", Fr::random(rng));
                row.insert("lambda", Fr::random(rng));
            }
            row.insert("q_add", sel);
            row
        }
        20 => {
            let (q_l, q_r, q_m, q_c) = (
                Fr::random(rng),
                Fr::random(rng),
                Fr::random(rng),
                Fr::random(rng),
            );
            let q_o = Fr::random_nonzero(rng);
            let (w_1, w_2) = (Fr::random(rng), Fr::random(rng));
            let w_3 =
                (q_l * w_1 + q_r * w_2 + q_m * w_1 * w_2 + q_c) * q_o.inverse().expect("nonzero");
            Row::from([
                ("q_L", q_l),
                ("q_R", q_r),
                ("q_M", q_m),
                ("q_O", q_o),
                ("q_C", q_c),
                ("w_1", w_1),
                ("w_2", w_2),
                ("w_3", w_3),
            ])
        }
        22 => {
            let mut row = Row::new();
            let names = [
                "q_1", "q_2", "q_3", "q_4", "q_M1", "q_M2", "q_H1", "q_H2", "q_H3", "q_H4",
                "q_ecc", "q_C",
            ];
            for name in names {
                row.insert(name, Fr::random(rng));
            }
            let w: Vec<Fr> = (0..4).map(|_| Fr::random(rng)).collect();
            let q = |s: &str| row[s];
            let p5 = |x: Fr| x.square().square() * x;
            let lhs = q("q_1") * w[0]
                + q("q_2") * w[1]
                + q("q_3") * w[2]
                + q("q_4") * w[3]
                + q("q_M1") * w[0] * w[1]
                + q("q_M2") * w[2] * w[3]
                + q("q_H1") * p5(w[0])
                + q("q_H2") * p5(w[1])
                + q("q_H3") * p5(w[2])
                + q("q_H4") * p5(w[3])
                + q("q_ecc") * w[0] * w[1] * w[2] * w[3]
                + q("q_C");
            let q_o = Fr::random_nonzero(rng);
            row.insert("q_O", q_o);
            row.insert("w_5", lhs * q_o.inverse().expect("nonzero"));
            for (name, v) in ["w_1", "w_2", "w_3", "w_4"].into_iter().zip(w) {
                row.insert(name, v);
            }
            row
        }
        _ => Row::new(),
    }
}

/// Tables bound by the prover: every input except a ZeroCheck eq factor.
pub fn committed_inputs(gate: &CompositePoly) -> Vec<usize> {
    let skip = gate.zerocheck_factor();
    (0..gate.inputs.len())
        .filter(|&i| Some(i) != skip)
        .collect()
}

fn binding_from_rows<R: Rng + ?Sized>(
    gate: &CompositePoly,
    n: u8,
    num_vars: usize,
    rng: &mut R,
) -> Binding {
    let size = 1usize << num_vars;
    let ids = committed_inputs(gate);
    let mut cols: Vec<Vec<Fr>> = vec![Vec::with_capacity(size); ids.len()];
    for _ in 0..size {
        let row = table_row(n, rng);
        for (col, &i) in cols.iter_mut().zip(&ids) {
            let v = match row.get(gate.inputs[i].id.as_str()) {
                Some(v) => *v,
                None => Fr::random(rng),
            };
            col.push(v);
        }
    }
    let mut b = Binding::new(num_vars);
    for (col, &i) in cols.into_iter().zip(&ids) {
        b.insert(&gate.inputs[i].id, Mle::new(col).expect("power of two"))
            .expect("sized");
    }
    b
}

/// A binding that satisfies the built-in gate `id` on every row.
///
/// OpenCheck and Spartan's second SumCheck carry no per-row constraint; their
/// tables are random and the eq inputs are eq tables at random points.
pub fn satisfying_binding<R: Rng + ?Sized>(id: GateId, num_vars: usize, rng: &mut R) -> Binding {
    let gate = builtin_gate(id).expect("built-in id");
    match id {
        GateId::Table(21) | GateId::Table(23) => {
            let k = if id == GateId::Table(21) { 3 } else { 5 };
            let inst = PermInstance::random_valid(k, num_vars, rng);
            let (beta, gamma) = (Fr::random(rng), Fr::random(rng));
            build_tables(&inst, beta, gamma).expect("valid instance").0
        }
        GateId::OpenCheck => {
            let mut b = Binding::new(num_vars);
            for m in &gate.inputs {
                let table = if m.role == Role::Eq {
                    let point: Vec<Fr> = (0..num_vars).map(|_| Fr::random(rng)).collect();
                    build_eq_mle(&point)
                } else {
                    Mle::new((0..1usize << num_vars).map(|_| Fr::random(rng)).collect())
                        .expect("sized")
                };
                b.insert(&m.id, table).expect("sized");
            }
            b
        }
        GateId::Table(n) => binding_from_rows(&gate, n, num_vars, rng),
    }
}

/// Inputs a soundness trial may corrupt: witness and permutation tables,
/// falling back to any committed input.
pub fn corruptible_inputs(gate: &CompositePoly) -> Vec<usize> {
    let committed = committed_inputs(gate);
    let preferred: Vec<usize> = committed
        .iter()
        .copied()
        .filter(|&i| matches!(gate.inputs[i].role, Role::Witness | Role::PermAux))
        .collect();
    if preferred.is_empty() {
        committed
    } else {
        preferred
    }
}

/// Adds a random nonzero value to one entry; returns `(input id, index)`.
pub fn corrupt_entry<R: Rng + ?Sized>(
    gate: &CompositePoly,
    binding: &mut Binding,
    rng: &mut R,
) -> (String, usize) {
    let choices = corruptible_inputs(gate);
    let i = choices[rng.gen_range(0..choices.len())];
    let id = gate.inputs[i].id.clone();
    let table = binding.get_mut(&id).expect("bound input");
    let idx = rng.gen_range(0..table.len());
    table.evals_mut()[idx] += Fr::random_nonzero(rng);
    (id, idx)
}
