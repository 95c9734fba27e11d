use serde::{Deserialize, Serialize};

use super::ValueError;

/// How features are combined into a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MixerKind {
    Linear,
    Polynomial { degree: u32 },
}

/// A mixer bound to a feature count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mixer {
    pub kind: MixerKind,
    pub features: usize,
}

impl Mixer {
    pub fn linear(features: usize) -> Self {
        Mixer { kind: MixerKind::Linear, features }
    }

    pub fn polynomial(features: usize, degree: u32) -> Self {
        Mixer { kind: MixerKind::Polynomial { degree }, features }
    }

    pub fn validate(&self) -> Result<(), ValueError> {
        if self.features == 0 {
            return Err(ValueError::Mixer("mixer needs at least one feature".into()));
        }
        if let MixerKind::Polynomial { degree } = self.kind {
            if degree == 0 {
                return Err(ValueError::Mixer("polynomial degree must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Short label such as `lin` or `poly2`.
    pub fn label(&self) -> String {
        match self.kind {
            MixerKind::Linear => "lin".into(),
            MixerKind::Polynomial { degree } => format!("poly{degree}"),
        }
    }
}

/// Number of degree-`d` monomials over `n` variables: C(n+d-1, d).
pub fn multiset_coefficient(n: usize, d: usize) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    // C(n+d-1, d) built up one factor at a time stays integral
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc * (n as u128 - 1 + i) / i;
    }
    usize::try_from(acc).expect("weight count fits in usize")
}

pub fn required_weights(mixer: &Mixer) -> usize {
    match mixer.kind {
        MixerKind::Linear => mixer.features,
        MixerKind::Polynomial { degree } => multiset_coefficient(mixer.features, degree as usize),
    }
}

/// All non-decreasing index tuples of length `d` over `0..n`, in
/// lexicographic order. Position in this list is the weight index.
pub fn enumerate_monomials(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(multiset_coefficient(n, d));
    if n == 0 || d == 0 {
        return out;
    }
    let mut tuple = vec![0usize; d];
    loop {
        out.push(tuple.clone());
        // bump the rightmost position that can still grow, reset the tail to it
        let Some(pos) = (0..d).rev().find(|&i| tuple[i] + 1 < n) else {
            return out;
        };
        let v = tuple[pos] + 1;
        for slot in &mut tuple[pos..] {
            *slot = v;
        }
    }
}

/// Value of `theta` under `mixer` with weights `w`. No constant term.
pub fn eval_mixer(mixer: &Mixer, w: &[f64], theta: &[f64]) -> Result<f64, ValueError> {
    if theta.len() != mixer.features {
        return Err(ValueError::Length { expected: mixer.features, got: theta.len(), what: "features" });
    }
    let need = required_weights(mixer);
    if w.len() != need {
        return Err(ValueError::Length { expected: need, got: w.len(), what: "weights" });
    }
    Ok(eval_unchecked(mixer, w, theta))
}

pub(crate) fn eval_unchecked(mixer: &Mixer, w: &[f64], theta: &[f64]) -> f64 {
    match mixer.kind {
        MixerKind::Linear => w.iter().zip(theta).map(|(a, b)| a * b).sum(),
        MixerKind::Polynomial { degree } => {
            let mut next = 0;
            let mut sum = 0.0;
            poly_rec(w, theta, 0, degree as usize, 1.0, &mut next, &mut sum);
            debug_assert_eq!(next, w.len());
            sum
        }
    }
}

/// Walks the monomials in lexicographic order carrying the running product
/// of the prefix, so each weight costs one multiply.
fn poly_rec(w: &[f64], theta: &[f64], start: usize, left: usize, prod: f64, next: &mut usize, sum: &mut f64) {
    if left == 0 {
        *sum += w[*next] * prod;
        *next += 1;
        return;
    }
    for i in start..theta.len() {
        poly_rec(w, theta, i, left - 1, prod * theta[i], next, sum);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(multiset_coefficient(5, 2), 15);
        assert_eq!(multiset_coefficient(18, 3), 1140);
        assert_eq!(multiset_coefficient(1, 3), 1);
        assert_eq!(multiset_coefficient(4, 0), 1);
    }

    #[test]
    fn two_by_two() {
        assert_eq!(enumerate_monomials(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(enumerate_monomials(1, 3), vec![vec![0, 0, 0]]);
        let m = Mixer::polynomial(2, 2);
        assert_eq!(eval_mixer(&m, &[1.0, 1.0, 1.0], &[2.0, 3.0]).unwrap(), 19.0);
    }

    #[test]
    fn length_mismatch() {
        let m = Mixer::linear(3);
        assert!(eval_mixer(&m, &[1.0; 2], &[0.0; 3]).is_err());
        assert!(eval_mixer(&m, &[1.0; 3], &[0.0; 4]).is_err());
    }
}
