//! Binary file formats for tables, proofs and permutation instances.
//!
//! All integers and field elements are little-endian. Every file starts with
//! a four-byte magic and a `u16` version.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::binding::Binding;
use crate::field::{Fr, ELEM_BYTES};
use crate::gates::CompositePoly;
use crate::mle::{sparsify, MaybeSparse, Mle, SparseMle};
use crate::permcheck::PermInstance;
use crate::sumcheck::{GateProof, ProofKind, RoundPoly, SumcheckProof};

pub const MLE_MAGIC: &[u8; 4] = b"PMLE";
pub const PROOF_MAGIC: &[u8; 4] = b"PSCP";
pub const PERM_MAGIC: &[u8; 4] = b"PPRM";
pub const FORMAT_VERSION: u16 = 1;
/// Transcript hash tag stored in proof headers.
pub const HASH_SHA3_256: u8 = 1;

const MAX_VARS: u32 = 32;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> IoError {
    IoError::Malformed(msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IoError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| malformed(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IoError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, IoError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, IoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn fr(&mut self) -> Result<Fr, IoError> {
        let b: &[u8; ELEM_BYTES] = self.take(ELEM_BYTES)?.try_into().unwrap();
        Fr::from_bytes_le(b).map_err(|_| {
            malformed(format!(
                "non-canonical element at byte {}",
                self.pos - ELEM_BYTES
            ))
        })
    }

    fn frs(&mut self, n: usize) -> Result<Vec<Fr>, IoError> {
        if n.saturating_mul(ELEM_BYTES) > self.buf.len() - self.pos {
            return Err(malformed("element count exceeds file size"));
        }
        (0..n).map(|_| self.fr()).collect()
    }

    fn string(&mut self) -> Result<String, IoError> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| malformed("invalid utf-8"))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<(), IoError> {
        if self.take(4)? != magic {
            return Err(malformed(format!(
                "bad magic, expected {}",
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.u16()?;
        if v != FORMAT_VERSION {
            return Err(malformed(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn num_vars(&mut self) -> Result<usize, IoError> {
        let mu = self.u32()?;
        if mu > MAX_VARS {
            return Err(malformed(format!("num_vars {mu} too large")));
        }
        Ok(mu as usize)
    }

    fn finish(self) -> Result<(), IoError> {
        if self.pos != self.buf.len() {
            return Err(malformed(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn put_fr(out: &mut Vec<u8>, v: &Fr) {
    out.extend_from_slice(&v.to_bytes_le());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u16).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_header(out: &mut Vec<u8>, magic: &[u8; 4]) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
}

/// Encodes a table, sparse when at most `sparse_threshold` of entries are nonzero.
pub fn encode_mle(m: &Mle, sparse_threshold: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(19 + m.len() * ELEM_BYTES);
    put_header(&mut out, MLE_MAGIC);
    match sparsify(m, sparse_threshold) {
        MaybeSparse::Dense(d) => {
            out.push(0);
            out.extend_from_slice(&(d.num_vars() as u32).to_le_bytes());
            out.extend_from_slice(&(d.len() as u64).to_le_bytes());
            d.evals().iter().for_each(|v| put_fr(&mut out, v));
        }
        MaybeSparse::Sparse(s) => {
            out.push(1);
            out.extend_from_slice(&(s.num_vars() as u32).to_le_bytes());
            out.extend_from_slice(&(s.values().len() as u64).to_le_bytes());
            s.offsets()
                .iter()
                .for_each(|o| out.extend_from_slice(&o.to_le_bytes()));
            s.values().iter().for_each(|v| put_fr(&mut out, v));
        }
    }
    out
}

pub fn decode_mle(bytes: &[u8]) -> Result<Mle, IoError> {
    let mut r = Reader::new(bytes);
    r.header(MLE_MAGIC)?;
    let flag = r.u8()?;
    let mu = r.num_vars()?;
    let count = r.u64()?;
    let m = match flag {
        0 => {
            if count != 1u64 << mu {
                return Err(malformed(format!("dense count {count} for num_vars {mu}")));
            }
            Mle::new(r.frs(count as usize)?).map_err(|e| malformed(e.to_string()))?
        }
        1 => {
            if count > 1u64 << mu {
                return Err(malformed(format!("sparse count {count} for num_vars {mu}")));
            }
            let offsets = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            let values = r.frs(count as usize)?;
            SparseMle::new(mu, offsets, values)
                .map_err(|e| malformed(e.to_string()))?
                .densify()
        }
        f => return Err(malformed(format!("unknown layout flag {f}"))),
    };
    r.finish()?;
    Ok(m)
}

/// Fields of a proof file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofHeader {
    pub gate: String,
    pub fingerprint: [u8; 32],
    pub num_vars: usize,
    pub degree: usize,
    pub hash: u8,
}

impl ProofHeader {
    /// Checks that the proof was produced for `gate`.
    pub fn matches(&self, gate: &CompositePoly) -> bool {
        self.fingerprint == gate.fingerprint() && self.degree == gate.degree()
    }
}

pub fn encode_proof(gate: &CompositePoly, gp: &GateProof) -> Vec<u8> {
    let p = &gp.proof;
    let mut out = Vec::new();
    put_header(&mut out, PROOF_MAGIC);
    out.push(HASH_SHA3_256);
    put_str(&mut out, &gate.name);
    out.extend_from_slice(&gate.fingerprint());
    out.extend_from_slice(&(p.num_vars() as u32).to_le_bytes());
    out.extend_from_slice(&(gate.degree() as u32).to_le_bytes());
    match gp.kind {
        ProofKind::Plain => out.push(0),
        ProofKind::ZeroCheck => out.push(1),
        ProofKind::PermCheck { root } => {
            out.push(2);
            put_fr(&mut out, &root);
        }
    }
    put_fr(&mut out, &p.claim);
    for round in &p.rounds {
        out.extend_from_slice(&(round.evals.len() as u32).to_le_bytes());
        round.evals.iter().for_each(|v| put_fr(&mut out, v));
    }
    p.final_point.iter().for_each(|v| put_fr(&mut out, v));
    out.extend_from_slice(&(p.final_evals.len() as u32).to_le_bytes());
    for (id, v) in &p.final_evals {
        put_str(&mut out, id);
        put_fr(&mut out, v);
    }
    out
}

pub fn decode_proof(bytes: &[u8]) -> Result<(ProofHeader, GateProof), IoError> {
    let mut r = Reader::new(bytes);
    r.header(PROOF_MAGIC)?;
    let hash = r.u8()?;
    if hash != HASH_SHA3_256 {
        return Err(malformed(format!("unknown hash tag {hash}")));
    }
    let gate = r.string()?;
    let fingerprint: [u8; 32] = r.take(32)?.try_into().unwrap();
    let num_vars = r.num_vars()?;
    let degree = r.u32()? as usize;
    let kind = match r.u8()? {
        0 => ProofKind::Plain,
        1 => ProofKind::ZeroCheck,
        2 => ProofKind::PermCheck { root: r.fr()? },
        k => return Err(malformed(format!("unknown proof kind {k}"))),
    };
    let claim = r.fr()?;
    let mut rounds = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        let n = r.u32()? as usize;
        rounds.push(RoundPoly { evals: r.frs(n)? });
    }
    let final_point = r.frs(num_vars)?;
    let n = r.u32()? as usize;
    let mut final_evals = Vec::new();
    for _ in 0..n {
        let id = r.string()?;
        final_evals.push((id, r.fr()?));
    }
    r.finish()?;
    let header = ProofHeader {
        gate,
        fingerprint,
        num_vars,
        degree,
        hash,
    };
    let proof = SumcheckProof {
        claim,
        rounds,
        final_point,
        final_evals,
    };
    Ok((header, GateProof { kind, proof }))
}

pub fn encode_perm_instance(inst: &PermInstance) -> Vec<u8> {
    let mut out = Vec::new();
    put_header(&mut out, PERM_MAGIC);
    out.extend_from_slice(&(inst.num_vars() as u32).to_le_bytes());
    out.extend_from_slice(&(inst.k() as u32).to_le_bytes());
    for w in inst.witnesses() {
        w.evals().iter().for_each(|v| put_fr(&mut out, v));
    }
    for col in inst.sigma() {
        col.iter()
            .for_each(|l| out.extend_from_slice(&l.to_le_bytes()));
    }
    out
}

pub fn decode_perm_instance(bytes: &[u8]) -> Result<PermInstance, IoError> {
    let mut r = Reader::new(bytes);
    r.header(PERM_MAGIC)?;
    let mu = r.num_vars()?;
    let k = r.u32()? as usize;
    let n = 1usize << mu;
    if k == 0 || k.saturating_mul(n).saturating_mul(ELEM_BYTES + 8) > bytes.len() {
        return Err(malformed(format!(
            "{k} columns of 2^{mu} do not fit the file"
        )));
    }
    let witnesses = (0..k)
        .map(|_| Mle::new(r.frs(n)?).map_err(|e| malformed(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma = (0..k)
        .map(|_| (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    r.finish()?;
    PermInstance::new(witnesses, sigma).map_err(|e| malformed(e.to_string()))
}

fn read(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_mle(path: &Path) -> Result<Mle, IoError> {
    decode_mle(&read(path)?)
}

pub fn write_mle(path: &Path, m: &Mle) -> Result<(), IoError> {
    write(path, &encode_mle(m, 0.1))
}

pub fn read_proof(path: &Path) -> Result<(ProofHeader, GateProof), IoError> {
    decode_proof(&read(path)?)
}

pub fn write_proof(path: &Path, gate: &CompositePoly, gp: &GateProof) -> Result<(), IoError> {
    write(path, &encode_proof(gate, gp))
}

pub fn read_perm_instance(path: &Path) -> Result<PermInstance, IoError> {
    decode_perm_instance(&read(path)?)
}

pub fn write_perm_instance(path: &Path, inst: &PermInstance) -> Result<(), IoError> {
    write(path, &encode_perm_instance(inst))
}

/// Writes one `<id>.mle` file per bound table.
pub fn write_binding_dir(dir: &Path, b: &Binding) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for (id, m) in b.iter() {
        write_mle(&dir.join(format!("{id}.mle")), m)?;
    }
    Ok(())
}

/// Loads the tables `ids` from `<dir>/<id>.mle`.
pub fn read_binding_dir<'a>(
    dir: &Path,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<Binding, IoError> {
    let mut tables = Vec::new();
    for id in ids {
        tables.push((id, read_mle(&dir.join(format!("{id}.mle")))?));
    }
    let mu = tables.first().map_or(0, |(_, m)| m.num_vars());
    let mut b = Binding::new(mu);
    for (id, m) in tables {
        b.insert(id, m)
            .map_err(|e| malformed(format!("{id}: {e}")))?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::parse_gate;
    use crate::sumcheck::prove_gate;
    use crate::transcript::Transcript;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mle_dense_and_sparse_round_trip() {
        let dense = Mle::from_u64s(&[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let bytes = encode_mle(&dense, 0.1);
        assert_eq!(bytes[6], 0);
        assert_eq!(bytes.len(), 4 + 2 + 1 + 4 + 8 + 8 * 32);
        assert_eq!(decode_mle(&bytes).unwrap(), dense);

        let sparse = Mle::from_u64s(&[0, 0, 9, 0, 0, 0, 0, 0]).unwrap();
        let bytes = encode_mle(&sparse, 0.2);
        assert_eq!(bytes[6], 1);
        assert_eq!(bytes.len(), 4 + 2 + 1 + 4 + 8 + 4 + 32);
        assert_eq!(decode_mle(&bytes).unwrap(), sparse);
    }

    #[test]
    fn mle_rejects_damage() {
        let bytes = encode_mle(&Mle::from_u64s(&[1, 2]).unwrap(), 0.0);
        assert!(decode_mle(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_mle(&extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_mle(&bad).is_err());
        let at = 4 + 2 + 1 + 4 + 8;
        let mut big = bytes;
        big[at..at + 32].fill(0xff);
        assert!(decode_mle(&big).is_err());
    }

    #[test]
    fn proof_round_trip() {
        let g = parse_gate("f = a*b - c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = Binding::new(3);
        for id in ["a", "b", "c"] {
            b.insert(
                id,
                Mle::new((0..8).map(|_| Fr::random(&mut rng)).collect()).unwrap(),
            )
            .unwrap();
        }
        let (gp, _) = prove_gate(&g, &b, &mut Transcript::new(b"io")).unwrap();
        let bytes = encode_proof(&g, &gp);
        let (h, back) = decode_proof(&bytes).unwrap();
        assert_eq!(back, gp);
        assert!(h.matches(&g));
        assert_eq!(h.num_vars, 3);
        for cut in [0, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                decode_proof(&bytes[..cut]),
                Err(IoError::Malformed(_))
            ));
        }
    }

    #[test]
    fn perm_instance_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = PermInstance::random_valid(3, 4, &mut rng);
        let back = decode_perm_instance(&encode_perm_instance(&inst)).unwrap();
        assert_eq!(back.digest(), inst.digest());
    }
}
