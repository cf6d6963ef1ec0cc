use divscope_core::rng::SeededRng;
use divscope_core::seqio::{write_fasta, Read, ReadSet};

pub const BASES: &[u8; 4] = b"ACGT";

pub fn random_seq(rng: &mut SeededRng, len: usize) -> Vec<u8> {
    (0..len).map(|_| BASES[(rng.next_u64() % 4) as usize]).collect()
}

/// Substitutes each base with probability `rate` by one of the other three.
pub fn mutate(rng: &mut SeededRng, seq: &[u8], rate: f64) -> Vec<u8> {
    seq.iter()
        .map(|&c| {
            if rng.uniform() < rate {
                let others: Vec<u8> = BASES.iter().copied().filter(|&b| b != c).collect();
                others[(rng.next_u64() % 3) as usize]
            } else {
                c
            }
        })
        .collect()
}

/// Exactly `k` substitutions at distinct positions.
pub fn substitute_exactly(rng: &mut SeededRng, seq: &[u8], k: usize) -> Vec<u8> {
    let mut out = seq.to_vec();
    let mut positions: Vec<usize> = (0..seq.len()).collect();
    for i in 0..k {
        let j = i + (rng.next_u64() % (positions.len() - i) as u64) as usize;
        positions.swap(i, j);
        let p = positions[i];
        let others: Vec<u8> = BASES.iter().copied().filter(|&b| b != seq[p]).collect();
        out[p] = others[(rng.next_u64() % 3) as usize];
    }
    out
}

/// Reads drawn as mutated copies of `families` random seed sequences,
/// interleaved so family `i % families` owns read `i`.
pub fn clone_families(
    families: usize,
    reads: usize,
    len: usize,
    rate: f64,
    seed: u64,
) -> (ReadSet, Vec<usize>) {
    let mut rng = SeededRng::new(seed);
    let seeds: Vec<Vec<u8>> = (0..families).map(|_| random_seq(&mut rng, len)).collect();
    let mut out = Vec::with_capacity(reads);
    let mut truth = Vec::with_capacity(reads);
    for i in 0..reads {
        let f = i % families;
        let seq = mutate(&mut rng, &seeds[f], rate);
        out.push(Read::new(format!("fam{f}_{i}"), &seq).unwrap());
        truth.push(f);
    }
    (ReadSet::new(out, "").unwrap(), truth)
}

pub fn random_reads(n: usize, len: usize, seed: u64) -> ReadSet {
    let mut rng = SeededRng::new(seed);
    let reads = (0..n)
        .map(|i| Read::new(format!("r{i}"), &random_seq(&mut rng, len)).unwrap())
        .collect();
    ReadSet::new(reads, "").unwrap()
}

pub fn fasta_bytes(rs: &ReadSet) -> Vec<u8> {
    write_fasta(rs).into_bytes()
}

/// Homologous marker model: a shared random backbone; species `s` carries
/// its own substitutions at positions `≡ 2s (mod 10)` (up to five species).
pub fn species_seeds(species: usize, len: usize, seed: u64) -> Vec<Vec<u8>> {
    assert!(species <= 5);
    let mut rng = SeededRng::new(seed);
    let backbone = random_seq(&mut rng, len);
    (0..species)
        .map(|s| {
            let mut q = backbone.clone();
            for p in (2 * s..len).step_by(10) {
                q[p] = if q[p] == b'A' { b'C' } else { b'A' };
            }
            q
        })
        .collect()
}
