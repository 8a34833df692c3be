//! Numerical semigroups: membership, gaps, Schubert index / Young diagram,
//! symmetry and the `(m, m_i, n)` profile behind the Weierstrass normal form.
//!
//! Gaps are indexed from 0: `gaps()[0]` is the smallest gap `l_0`, and the
//! Schubert index is `alpha_i = l_i - i - 1`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericalSemigroup {
    generators: Vec<u64>,
    conductor: u64,
    /// `members[k]` for `0 <= k < conductor`; everything above is a member.
    members: Vec<bool>,
    gaps: Vec<u64>,
}

use crate::gcd;

/// Membership table of the monoid generated by `gens`, extended until a run
/// of `min(gens)` consecutive members appears (every larger integer is then
/// reachable). Returns the table truncated at the conductor.
fn membership_table(gens: &[u64]) -> (Vec<bool>, u64) {
    let a = *gens.iter().min().unwrap();
    let mut table = vec![true];
    let mut run = 1u64;
    let mut k = 0u64;
    while run < a {
        k += 1;
        let hit = gens.iter().any(|&g| g <= k && table[(k - g) as usize]);
        table.push(hit);
        run = if hit { run + 1 } else { 0 };
    }
    // the last `a` entries are members; the conductor is the start of that run
    let conductor = table.len() as u64 - a;
    table.truncate(conductor as usize);
    (table, conductor)
}

fn representable(k: u64, gens: &[u64]) -> bool {
    let mut reach = vec![false; k as usize + 1];
    reach[0] = true;
    for v in 1..=k {
        reach[v as usize] = gens.iter().any(|&g| g <= v && reach[(v - g) as usize]);
    }
    reach[k as usize]
}

impl NumericalSemigroup {
    /// Builds the semigroup generated by `gens`; input order and redundancy
    /// do not matter, the stored generating set is minimal and sorted.
    pub fn from_generators(gens: &[u64]) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        if gens.contains(&0) {
            return Err(Error::ZeroGenerator);
        }
        let d = gens.iter().fold(0, |acc, &g| gcd(acc, g));
        if d != 1 {
            return Err(Error::NotCofinite(d));
        }
        let mut sorted = gens.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut minimal: Vec<u64> = Vec::new();
        for &g in &sorted {
            if minimal.is_empty() || !representable(g, &minimal) {
                minimal.push(g);
            }
        }
        let (members, conductor) = membership_table(&minimal);
        let gaps = (0..conductor).filter(|&k| !members[k as usize]).collect();
        Ok(NumericalSemigroup {
            generators: minimal,
            conductor,
            members,
            gaps,
        })
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Smallest integer `c` with `[c, inf)` contained in the semigroup.
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= self.conductor || self.members[k as usize]
    }

    /// Sorted gap sequence `l_0 < l_1 < ... < l_{g-1}`.
    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn genus(&self) -> usize {
        self.gaps.len()
    }

    /// `a_min(H)`: the smallest positive element (1 for the full semigroup).
    pub fn multiplicity(&self) -> u64 {
        self.generators[0]
    }

    /// Members `<= bound`, ascending.
    pub fn members_up_to(&self, bound: u64) -> Vec<u64> {
        (0..=bound).filter(|&k| self.contains(k)).collect()
    }

    /// Frobenius number (largest gap), `None` for genus 0.
    pub fn frobenius(&self) -> Option<u64> {
        self.gaps.last().copied()
    }

    pub fn schubert_data(&self) -> SchubertData {
        let alpha: Vec<u64> = self.gaps.iter().enumerate().map(|(i, &l)| l - i as u64 - 1).collect();
        let g = alpha.len();
        let young = (1..=g).map(|i| alpha[g - i] + 1).collect();
        SchubertData { alpha, young }
    }

    /// `2g - 1` is a gap. Cross-checked against self-transposition of the
    /// Young diagram; a disagreement would be a bug and panics.
    pub fn is_symmetric(&self) -> Result<bool> {
        let g = self.genus();
        if g == 0 {
            return Err(Error::DegenerateGenusZero);
        }
        let by_gap = self.gaps.binary_search(&(2 * g as u64 - 1)).is_ok();
        let by_young = self.schubert_data().is_self_transpose();
        assert_eq!(by_gap, by_young, "symmetry tests disagree for {:?}", self.generators);
        Ok(by_gap)
    }

    pub fn normal_form_profile(&self) -> Result<NormalFormProfile> {
        if self.genus() == 0 {
            return Err(Error::DegenerateGenusZero);
        }
        let m = self.multiplicity();
        let mut m_seq = vec![0u64; m as usize];
        m_seq[0] = m;
        let mut found = 1;
        let mut k = 1u64;
        while found < m as usize {
            let res = (k % m) as usize;
            if res != 0 && m_seq[res] == 0 && self.contains(k) {
                m_seq[res] = k;
                found += 1;
            }
            k += 1;
        }
        let n = (1..m as usize)
            .filter(|&j| gcd(m, j as u64) == 1)
            .map(|j| m_seq[j])
            .min()
            .expect("m >= 2 has a unit residue");
        let degree_bounds = (1..=m).map(|i| i * n / m).collect();
        Ok(NormalFormProfile {
            m,
            m_seq,
            n,
            degree_bounds,
        })
    }
}

/// Schubert index and Young diagram of a gap sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchubertData {
    pub alpha: Vec<u64>,
    /// Row lengths `Lambda_1 >= Lambda_2 >= ... >= Lambda_g`.
    pub young: Vec<u64>,
}

impl SchubertData {
    pub fn transpose(&self) -> Vec<u64> {
        let cols = self.young.first().copied().unwrap_or(0);
        (1..=cols)
            .map(|c| self.young.iter().filter(|&&row| row >= c).count() as u64)
            .collect()
    }

    pub fn is_self_transpose(&self) -> bool {
        self.transpose() == self.young
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormProfile {
    pub m: u64,
    /// `m_i = min { h in H \ {0} : h = i mod m }`, `m_0 = m`.
    pub m_seq: Vec<u64>,
    pub n: u64,
    /// `floor(i n / m)` for `i = 1..=m`.
    pub degree_bounds: Vec<u64>,
}
