use crate::gaussian::Gaussian;

/// Prior and current marginal of every weight (and bias) of one layer.
///
/// Per-example factor-to-weight messages live with the examples and batch
/// aggregates with the trainer; the store only keeps what a prediction
/// needs plus the prior used to rebuild the marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightStore {
    pub prior: Vec<Gaussian>,
    pub marginal: Vec<Gaussian>,
}

impl WeightStore {
    /// All weights at `N(0, 1)` until priors are initialized.
    pub fn new(len: usize) -> Self {
        let g = Gaussian::new(0.0, 1.0);
        WeightStore {
            prior: vec![g; len],
            marginal: vec![g; len],
        }
    }

    pub fn len(&self) -> usize {
        self.prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior.is_empty()
    }

    pub fn set_prior(&mut self, prior: Vec<Gaussian>) {
        assert_eq!(prior.len(), self.prior.len());
        self.marginal.clone_from(&prior);
        self.prior = prior;
    }

    /// Replaces one factor-to-weight message: `marginal / old * new`.
    #[inline]
    pub fn swap_message(&mut self, k: usize, old: Gaussian, new: Gaussian) {
        let m = &mut self.marginal[k];
        *m = Gaussian::new(m.tau - old.tau + new.tau, m.rho - old.rho + new.rho);
    }

    /// Rebuilds every marginal as `prior * others * prod(active)`.
    ///
    /// Weights whose fresh precision is not positive are reset to their
    /// prior; the number of such weights is returned.
    pub fn recompute<'a>(
        &mut self,
        others: Option<&[Gaussian]>,
        active: impl Iterator<Item = &'a [Gaussian]>,
    ) -> usize {
        self.marginal.clone_from(&self.prior);
        if let Some(o) = others {
            for (m, g) in self.marginal.iter_mut().zip(o) {
                *m *= *g;
            }
        }
        for msgs in active {
            for (m, g) in self.marginal.iter_mut().zip(msgs) {
                *m *= *g;
            }
        }
        let mut clamped = 0;
        for (m, p) in self.marginal.iter_mut().zip(&self.prior) {
            if !m.is_proper() {
                *m = *p;
                clamped += 1;
            }
        }
        clamped
    }
}
