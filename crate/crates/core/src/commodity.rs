//! Preliminary per-link rate assignment: classic exclusive selection (one
//! commodity per link) and MaxU link sharing (several commodities split a
//! link's rate in decreasing backpressure order).

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::topology::ConnectivityGraph;

/// Per-link schedule indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Undecided,
    Muted,
    Scheduled,
}

/// Everything a rate assignment depends on in one slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotView<'a> {
    pub graph: &'a ConnectivityGraph,
    /// Queue lengths, nodes × commodities.
    pub queues: &'a Array2<u32>,
    /// Backpressure, links × commodities.
    pub backpressure: &'a Array2<f64>,
    /// Real-time link rates.
    pub rates: &'a [f64],
}

impl SlotView<'_> {
    pub fn commodity_count(&self) -> usize {
        self.queues.ncols()
    }

    /// Integer packet budget of a link in this slot.
    pub fn budget(&self, link: usize) -> u32 {
        let r = self.rates[link];
        if r <= 0.0 {
            0
        } else {
            r.floor() as u32
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateAssignment {
    /// Preliminary rates γ, links × commodities.
    pub gamma: Array2<u32>,
    /// Final rates μ, links × commodities. Zero until a scheduler fills it.
    pub mu: Array2<u32>,
    /// Link utilities.
    pub w: Vec<f64>,
    pub x: Vec<Decision>,
}

impl RateAssignment {
    pub fn from_gamma(gamma: Array2<u32>, backpressure: &Array2<f64>) -> Self {
        let w = gamma
            .rows()
            .into_iter()
            .zip(backpressure.rows())
            .map(|(g, u)| utility(g, u))
            .collect();
        let (links, commodities) = gamma.dim();
        Self {
            gamma,
            mu: Array2::zeros((links, commodities)),
            w,
            x: vec![Decision::Undecided; links],
        }
    }

    pub fn link_count(&self) -> usize {
        self.w.len()
    }

    /// Total packets a link carries under the final assignment.
    pub fn mu_total(&self, link: usize) -> u32 {
        self.mu.row(link).sum()
    }

    /// `Σ_c μ·U` summed over all links.
    pub fn objective(&self, backpressure: &Array2<f64>) -> f64 {
        self.mu
            .rows()
            .into_iter()
            .zip(backpressure.rows())
            .map(|(m, u)| utility(m, u))
            .sum()
    }
}

/// `Σ_c rate_c · max(U_c, 0)`.
pub fn utility(rates: ArrayView1<u32>, backpressure: ArrayView1<f64>) -> f64 {
    rates
        .iter()
        .zip(backpressure.iter())
        .filter(|(&g, _)| g > 0)
        .map(|(&g, &u)| g as f64 * u.max(0.0))
        .sum()
}

/// Commodity with the largest backpressure on a link; ties go to the lower index.
pub fn exclusive_select(backpressure: ArrayView1<f64>) -> usize {
    assert!(!backpressure.is_empty(), "no commodities");
    let mut best = 0;
    for (c, &u) in backpressure.iter().enumerate().skip(1) {
        if u > backpressure[best] {
            best = c;
        }
    }
    best
}

/// Each link carries only its max-backpressure commodity, as many packets as
/// the rate and the transmitter's queue allow, and only if that backpressure
/// is positive.
pub fn exclusive_assign(view: &SlotView) -> RateAssignment {
    let nc = view.commodity_count();
    let mut gamma = Array2::zeros((view.graph.link_count(), nc));
    if nc > 0 {
        for link in view.graph.links() {
            let u = view.backpressure.row(link.id);
            let c = exclusive_select(u);
            if u[c] > 0.0 {
                gamma[[link.id, c]] = view.budget(link.id).min(view.queues[[link.src, c]]);
            }
        }
    }
    RateAssignment::from_gamma(gamma, view.backpressure)
}

/// Commodities with positive backpressure and a non-empty queue, by
/// decreasing backpressure (ties to the lower index).
pub fn maxu_order(backpressure: ArrayView1<f64>, queues: ArrayView1<u32>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..backpressure.len())
        .filter(|&c| backpressure[c] > 0.0 && queues[c] > 0)
        .collect();
    order.sort_by(|&a, &b| backpressure[b].total_cmp(&backpressure[a]).then(a.cmp(&b)));
    order
}

/// Link sharing: walk the commodities in [`maxu_order`], giving each as many
/// packets as its queue holds until the link's budget runs out.
pub fn maxu_assign(view: &SlotView) -> RateAssignment {
    let nc = view.commodity_count();
    let mut gamma = Array2::zeros((view.graph.link_count(), nc));
    for link in view.graph.links() {
        let mut residual = view.budget(link.id);
        let queues = view.queues.row(link.src);
        for c in maxu_order(view.backpressure.row(link.id), queues) {
            if residual == 0 {
                break;
            }
            let g = residual.min(queues[c]);
            gamma[[link.id, c]] = g;
            residual -= g;
        }
    }
    RateAssignment::from_gamma(gamma, view.backpressure)
}

/// A commodity selection rule.
pub trait CommoditySelector: Sync {
    fn assign(&self, view: &SlotView) -> RateAssignment;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommoditySelection {
    #[serde(rename = "excl")]
    Exclusive,
    #[serde(rename = "maxu")]
    MaxU,
}

impl CommoditySelection {
    pub fn as_str(self) -> &'static str {
        match self {
            CommoditySelection::Exclusive => "excl",
            CommoditySelection::MaxU => "maxu",
        }
    }
}

impl CommoditySelector for CommoditySelection {
    fn assign(&self, view: &SlotView) -> RateAssignment {
        match self {
            CommoditySelection::Exclusive => exclusive_assign(view),
            CommoditySelection::MaxU => maxu_assign(view),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;
    use ndarray::{array, Array1};

    fn single_link() -> ConnectivityGraph {
        let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        ConnectivityGraph::from_links(pos, &[(0, 1)], 1.0)
    }

    fn assign_one(
        sel: CommoditySelection,
        rate: f64,
        queues: &[u32],
        backpressure: &[f64],
    ) -> RateAssignment {
        let g = single_link();
        let nc = queues.len();
        let mut q = Array2::zeros((2, nc));
        q.row_mut(0).assign(&Array1::from(queues.to_vec()));
        let u = Array2::from_shape_vec((1, nc), backpressure.to_vec()).unwrap();
        let rates = [rate];
        sel.assign(&SlotView {
            graph: &g,
            queues: &q,
            backpressure: &u,
            rates: &rates,
        })
    }

    #[test]
    fn select_single_commodity() {
        assert_eq!(exclusive_select(array![-3.0].view()), 0);
    }

    #[test]
    fn select_ties_go_to_lower_index() {
        assert_eq!(exclusive_select(array![6.5, -1.0, 6.5].view()), 0);
        assert_eq!(exclusive_select(array![-4.0, -1.0, -2.0].view()), 1);
    }

    #[test]
    fn exclusive_examples() {
        let a = assign_one(CommoditySelection::Exclusive, 10.0, &[3], &[6.0]);
        assert_eq!(a.gamma, array![[3]]);
        assert_eq!(a.w, vec![18.0]);

        let a = assign_one(CommoditySelection::Exclusive, 10.0, &[3], &[-0.5]);
        assert_eq!(a.gamma, array![[0]]);
        assert_eq!(a.w, vec![0.0]);

        let a = assign_one(CommoditySelection::Exclusive, 2.9, &[100], &[4.0]);
        assert_eq!(a.gamma, array![[2]]);
        assert_eq!(a.w, vec![8.0]);
    }

    #[test]
    fn exclusive_ignores_other_commodities() {
        let a = assign_one(CommoditySelection::Exclusive, 10.0, &[1, 9], &[5.0, 4.0]);
        assert_eq!(a.gamma, array![[1, 0]]);
    }

    #[test]
    fn maxu_residual_walk() {
        let a = assign_one(CommoditySelection::MaxU, 5.0, &[2, 4, 3], &[9.0, 8.0, 7.0]);
        assert_eq!(a.gamma, array![[2, 3, 0]]);
        assert_eq!(a.w, vec![2.0 * 9.0 + 3.0 * 8.0]);
    }

    #[test]
    fn maxu_sorts_by_backpressure() {
        let a = assign_one(CommoditySelection::MaxU, 5.0, &[4, 4, 4], &[1.0, 3.0, 2.0]);
        assert_eq!(a.gamma, array![[0, 4, 1]]);
    }

    #[test]
    fn maxu_filters_nonpositive_and_empty() {
        let a = assign_one(CommoditySelection::MaxU, 10.0, &[5, 0, 5], &[-1.0, 3.0, 0.0]);
        assert_eq!(a.gamma, array![[0, 0, 0]]);
        assert_eq!(a.w, vec![0.0]);
    }

    #[test]
    fn maxu_matches_exclusive_under_heavy_load() {
        let e = assign_one(CommoditySelection::Exclusive, 7.3, &[50, 50], &[2.0, 3.0]);
        let m = assign_one(CommoditySelection::MaxU, 7.3, &[50, 50], &[2.0, 3.0]);
        assert_eq!(e.gamma, m.gamma);
        assert_eq!(e.w, m.w);
    }

    #[test]
    fn zero_rate_gives_nothing() {
        let a = assign_one(CommoditySelection::MaxU, 0.0, &[5], &[3.0]);
        assert_eq!(a.gamma, array![[0]]);
    }

    #[test]
    fn serde_names() {
        let s: CommoditySelection = serde_json::from_str("\"maxu\"").unwrap();
        assert_eq!(s, CommoditySelection::MaxU);
        assert_eq!(CommoditySelection::Exclusive.as_str(), "excl");
    }
}
