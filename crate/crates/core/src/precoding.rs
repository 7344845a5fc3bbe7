//! Zero-forcing precoders, waterfilling power allocation and the achievable
//! spectral efficiency of a precoded user set.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Gram matrices with a larger condition number are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Unit-norm precoding directions with their powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// Users in selection order.
    pub users: Vec<usize>,
    pub directions: Vec<CVector>,
    /// `p_k^2`, watts.
    pub powers: Vec<f64>,
    /// Fraction of the coherence block left for data, in `(0, 1]`.
    pub prelog: f64,
}

impl PrecoderSet {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// Composite precoder `p_k = f_k p_k` of the `i`-th user.
    pub fn precoder(&self, i: usize) -> CVector {
        self.directions[i].scale(self.powers[i].sqrt())
    }
}

/// Normalised rows of `(H H^H)^{-1} H`, where row `i` of `H` is `channels[i]^T`.
///
/// Directions satisfy `f_j^H h_k = 0` for `j != k`. Fails with
/// [`Error::Singular`] when the Gram matrix condition number exceeds
/// [`MAX_GRAM_CONDITION`]; the error lists the users with the largest weight in
/// the near-null eigenvector.
pub fn zf_precoders(channels: &[&CVector], users: &[usize]) -> Result<Vec<CVector>> {
    let l = channels.len();
    if l == 0 {
        return Ok(Vec::new());
    }
    let m = channels[0].len();
    if l > m {
        return Err(Error::Singular {
            condition: f64::INFINITY,
            users: users.to_vec(),
        });
    }
    let h = CMatrix::from_fn(l, m, |i, j| channels[i][j]);
    let gram = &h * h.adjoint();
    let eig = crate::linalg::hermitian_part(&gram).symmetric_eigen();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..l {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let (lo, hi) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_GRAM_CONDITION) {
        let null = eig.eigenvectors.column(imin);
        let peak = null.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let offending = (0..l)
            .filter(|&i| null[i].norm() >= 0.3 * peak)
            .map(|i| users.get(i).copied().unwrap_or(i))
            .collect();
        return Err(Error::Singular {
            condition,
            users: offending,
        });
    }
    let chol = gram.cholesky().ok_or_else(|| Error::Singular {
        condition,
        users: users.to_vec(),
    })?;
    let x = chol.solve(&h);
    Ok((0..l)
        .map(|i| {
            let row = x.row(i).transpose();
            let norm = row.norm();
            row.unscale(norm)
        })
        .collect())
}

/// Waterfilling `p_k^2 = max(0, mu - noise / g_k)` with `sum p_k^2 = total_power`.
pub fn waterfill(gains: &[f64], total_power: f64, noise_power: f64) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::Domain("waterfilling needs at least one gain".into()));
    }
    if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Domain(format!("waterfilling gain {g} must be positive")));
    }
    if !(total_power > 0.0 && noise_power >= 0.0) {
        return Err(Error::Domain(
            "power budget must be positive and noise non-negative".into(),
        ));
    }
    let floors: Vec<f64> = gains.iter().map(|g| noise_power / g).collect();
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| floors[a].total_cmp(&floors[b]).then(a.cmp(&b)));
    // Largest active set whose water level clears every active floor.
    let mut prefix = 0.0;
    let mut level = 0.0;
    for (count, &i) in order.iter().enumerate() {
        prefix += floors[i];
        let candidate = (total_power + prefix) / (count + 1) as f64;
        if candidate > floors[i] || count == 0 {
            level = candidate;
        } else {
            break;
        }
    }
    let mut powers: Vec<f64> = floors.iter().map(|f| (level - f).max(0.0)).collect();
    // remove the rounding residue so the budget is met with equality
    let sum: f64 = powers.iter().sum();
    if sum > 0.0 {
        let scale = total_power / sum;
        powers.iter_mut().for_each(|p| *p *= scale);
    }
    Ok(powers)
}

/// Per-user spectral efficiencies and their sum, bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SeReport {
    pub per_user: Vec<f64>,
    pub sum: f64,
}

/// `R_k = prelog log2(1 + |p_k^H h_k|^2 / (noise + sum_{j != k} |p_j^H h_k|^2))`.
///
/// `channels[i]` is the channel of `set.users[i]` (true channels for
/// performance, estimates for a scheduler's internal metric).
pub fn sum_se(set: &PrecoderSet, channels: &[&CVector], noise_power: f64) -> Result<SeReport> {
    if channels.len() != set.len() || set.directions.len() != set.len() || set.powers.len() != set.len() {
        return Err(Error::Domain(format!(
            "{} precoders but {} channels",
            set.len(),
            channels.len()
        )));
    }
    let precoders: Vec<CVector> = (0..set.len()).map(|i| set.precoder(i)).collect();
    let per_user: Vec<f64> = (0..set.len())
        .map(|k| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (j, p) in precoders.iter().enumerate() {
                let g = p.dotc(channels[k]).norm_sqr();
                if j == k {
                    signal = g;
                } else {
                    interference += g;
                }
            }
            set.prelog * (signal / (noise_power + interference)).ln_1p() / std::f64::consts::LN_2
        })
        .collect();
    let sum = per_user.iter().sum();
    Ok(SeReport { per_user, sum })
}

/// ZF directions on `design` channels followed by waterfilling on
/// `|f_k^H h_k|^2` of the same channels.
pub fn zf_waterfill(
    design: &[&CVector],
    users: &[usize],
    total_power: f64,
    noise_power: f64,
    prelog: f64,
) -> Result<PrecoderSet> {
    let directions = zf_precoders(design, users)?;
    let gains: Vec<f64> = directions
        .iter()
        .zip(design)
        .map(|(f, h)| f.dotc(h).norm_sqr())
        .collect();
    let powers = waterfill(&gains, total_power, noise_power)?;
    Ok(PrecoderSet {
        users: users.to_vec(),
        directions,
        powers,
        prelog,
    })
}
