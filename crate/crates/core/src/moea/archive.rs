use crate::error::Result;
use crate::metrics::hypervolume;
use crate::problem::Genotype;

use super::dominates;

/// Nondominated set of every point offered so far. Points equal in objective
/// space to a member are not added.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    x: Vec<Genotype>,
    f: Vec<Vec<f64>>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Offers one point; returns whether it entered the archive.
    pub fn insert(&mut self, x: Genotype, f: Vec<f64>) -> bool {
        if self.f.iter().any(|g| dominates(g, &f) || *g == f) {
            return false;
        }
        let mut i = 0;
        while i < self.f.len() {
            if dominates(&f, &self.f[i]) {
                self.f.swap_remove(i);
                self.x.swap_remove(i);
            } else {
                i += 1;
            }
        }
        self.x.push(x);
        self.f.push(f);
        true
    }

    pub fn extend(&mut self, xs: &[Genotype], fs: &[Vec<f64>]) {
        for (x, f) in xs.iter().zip(fs) {
            self.insert(x.clone(), f.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn genotypes(&self) -> &[Genotype] {
        &self.x
    }

    pub fn objectives(&self) -> &[Vec<f64>] {
        &self.f
    }

    pub fn hypervolume(&self, reference: &[f64]) -> Result<f64> {
        hypervolume(&self.f, reference)
    }

    /// Members sorted by objective vector.
    pub fn into_sorted(self) -> (Vec<Vec<u32>>, Vec<Vec<f64>>) {
        let mut pairs: Vec<(Vec<f64>, Vec<u32>)> = self
            .f
            .into_iter()
            .zip(self.x.into_iter().map(Genotype::into_inner))
            .collect();
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        pairs.into_iter().map(|(f, x)| (x, f)).unzip()
    }
}
