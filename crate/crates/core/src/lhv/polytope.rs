use crate::bell::Behavior;
use crate::error::{Error, Result};

/// Largest party count whose `4^N` strategies we are willing to enumerate.
pub const MAX_PARTIES: usize = 8;

/// Local deterministic strategy: each party's outcome ("+" = true) per setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub outcomes: Vec<[bool; 2]>,
}

impl DeterministicStrategy {
    /// Strategy number `j`: bits `2x` and `2x+1` give party `x`'s outcomes.
    pub fn from_index(parties: usize, j: usize) -> Self {
        Self { outcomes: (0..parties).map(|x| [(j >> (2 * x)) & 1 == 1, (j >> (2 * x + 1)) & 1 == 1]).collect() }
    }

    pub fn parties(&self) -> usize {
        self.outcomes.len()
    }

    /// Outcome mask produced under settings `s`.
    pub fn response(&self, s: usize) -> usize {
        self.outcomes.iter().enumerate().fold(0, |acc, (x, o)| acc | (o[(s >> x) & 1] as usize) << x)
    }

    pub fn column(&self) -> Behavior {
        Behavior::deterministic(&self.outcomes)
    }
}

fn check_parties(parties: usize) -> Result<()> {
    if parties == 0 {
        return Err(Error::InvalidArgument("need at least one party".into()));
    }
    if parties > MAX_PARTIES {
        return Err(Error::Resource(format!("4^{parties} deterministic strategies exceed the limit of N <= {MAX_PARTIES}")));
    }
    Ok(())
}

pub fn enumerate_strategies(parties: usize) -> Result<Vec<DeterministicStrategy>> {
    check_parties(parties)?;
    Ok((0..1usize << (2 * parties)).map(|j| DeterministicStrategy::from_index(parties, j)).collect())
}

/// Collins-Gisin coordinate: probability that every party in `subset` sees
/// "+" with the given settings (bits outside `subset` are zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct CgKey {
    pub subset: usize,
    pub settings: usize,
}

/// All `3^N - 1` coordinates, ordered by subset then settings.
pub fn cg_keys(parties: usize) -> Vec<CgKey> {
    let mut keys = Vec::new();
    for subset in 1..1usize << parties {
        // Enumerate the submasks of `subset` in increasing order.
        let mut settings = 0usize;
        loop {
            keys.push(CgKey { subset, settings });
            if settings == subset {
                break;
            }
            settings = (settings.wrapping_sub(subset)) & subset;
        }
    }
    keys
}

pub fn cg_vector(behavior: &Behavior, keys: &[CgKey]) -> Vec<f64> {
    keys.iter().map(|k| behavior.plus_marginal(k.settings, k.subset)).collect()
}

/// CG coordinates of a deterministic strategy: 1 when all of `subset` answer "+".
pub fn strategy_cg(strategy: &DeterministicStrategy, keys: &[CgKey]) -> Vec<bool> {
    keys.iter().map(|k| strategy.response(k.settings) & k.subset == k.subset).collect()
}

/// Rewrites cell coefficients `c[s * 2^N + o]` as `constant + sum alpha_k cg_k`,
/// valid on every no-signaling behavior. Returns `(alpha, constant)`.
pub fn cells_to_cg(parties: usize, coeffs: &[f64], keys: &[CgKey]) -> (Vec<f64>, f64) {
    let cells = 1usize << parties;
    let mut alpha = vec![0.0; 1usize << (2 * parties)];
    let slot = |subset: usize, settings: usize| subset << parties | (settings & subset);
    let mut constant = 0.0;
    for s in 0..cells {
        for o in 0..cells {
            let c = coeffs[s * cells + o];
            if c == 0.0 {
                continue;
            }
            // p(s, o) = sum over U containing plus(o) of (-1)^|U \ plus(o)| cg(U, s|U).
            let rest = (cells - 1) & !o;
            let mut extra = 0usize;
            loop {
                let u = o | extra;
                let sign = if extra.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                if u == 0 {
                    constant += sign * c;
                } else {
                    alpha[slot(u, s)] += sign * c;
                }
                if extra == rest {
                    break;
                }
                extra = (extra.wrapping_sub(rest)) & rest;
            }
        }
    }
    (keys.iter().map(|k| alpha[slot(k.subset, k.settings)]).collect(), constant)
}

/// Cell coefficients of `constant + sum alpha_k cg_k`; the constant is carried
/// by the settings-0 block, which sums to one.
pub fn cg_to_cells(parties: usize, alpha: &[f64], constant: f64, keys: &[CgKey]) -> Vec<f64> {
    let cells = 1usize << parties;
    let mut out = vec![0.0; cells * cells];
    for (k, a) in keys.iter().zip(alpha) {
        for o in 0..cells {
            if o & k.subset == k.subset {
                out[k.settings * cells + o] += a;
            }
        }
    }
    for v in out.iter_mut().take(cells) {
        *v += constant;
    }
    out
}
