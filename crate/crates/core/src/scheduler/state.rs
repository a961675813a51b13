use ndarray::Array2;

use crate::commodity::{utility, Decision, RateAssignment, SlotView};
use crate::topology::{LinkId, TransceiverSpec};

/// Slack when comparing air-time costs against residual capacity.
pub(crate) const CAPACITY_EPS: f64 = 1e-9;

/// Working state of one scheduling call.
#[derive(Debug, Clone)]
pub struct SchedulerState<'a> {
    pub view: SlotView<'a>,
    pub spec: &'a TransceiverSpec,
    pub gamma: Array2<u32>,
    pub mu: Array2<u32>,
    pub w: Vec<f64>,
    pub tau: Vec<f64>,
    pub x: Vec<Decision>,
    /// Backlog not yet claimed by scheduled links.
    pub residual_q: Array2<u32>,
    pub residual_eta_tx: Vec<f64>,
    pub residual_eta_rx: Vec<u32>,
    /// Whether undecided links give up backlog claimed by scheduled ones.
    pub reassign: bool,
}

impl<'a> SchedulerState<'a> {
    pub fn new(view: SlotView<'a>, spec: &'a TransceiverSpec, assignment: RateAssignment, reassign: bool) -> Self {
        let tau = view
            .graph
            .links()
            .iter()
            .map(|l| spec.tx_cost(l.src, assignment.gamma.row(l.id).sum() as f64, view.rates[l.id]))
            .collect();
        Self {
            view,
            spec,
            gamma: assignment.gamma,
            mu: assignment.mu,
            w: assignment.w,
            tau,
            x: assignment.x,
            residual_q: view.queues.clone(),
            residual_eta_tx: spec.eta_tx.iter().map(|&e| e as f64).collect(),
            residual_eta_rx: spec.eta_rx.clone(),
            reassign,
        }
    }

    pub fn is_undecided(&self, link: LinkId) -> bool {
        self.x[link] == Decision::Undecided
    }

    pub fn undecided(&self) -> Vec<LinkId> {
        (0..self.x.len()).filter(|&e| self.is_undecided(e)).collect()
    }

    /// Caps the link's preliminary rates by the residual backlog at its
    /// transmitter and recomputes its utility and cost. No-op without
    /// reassignment.
    pub fn refresh(&mut self, link: LinkId) {
        if !self.reassign {
            return;
        }
        let src = self.view.graph.link(link).src;
        let mut changed = false;
        for c in 0..self.gamma.ncols() {
            let cap = self.residual_q[[src, c]];
            if self.gamma[[link, c]] > cap {
                self.gamma[[link, c]] = cap;
                changed = true;
            }
        }
        if changed {
            let g = self.gamma.row(link);
            self.w[link] = utility(g, self.view.backpressure.row(link));
            self.tau[link] = self.spec.tx_cost(src, g.sum() as f64, self.view.rates[link]);
        }
    }

    /// True if the transmitter can afford the link and the receiver has a
    /// free stream.
    pub fn fits_capacity(&self, link: LinkId) -> bool {
        let l = self.view.graph.link(link);
        self.tau[link] <= self.residual_eta_tx[l.src] + CAPACITY_EPS && self.residual_eta_rx[l.dst] > 0
    }

    pub fn schedule(&mut self, link: LinkId) {
        debug_assert!(self.is_undecided(link));
        let l = self.view.graph.link(link);
        self.x[link] = Decision::Scheduled;
        for c in 0..self.gamma.ncols() {
            let g = self.gamma[[link, c]];
            self.mu[[link, c]] = g;
            self.residual_q[[l.src, c]] = self.residual_q[[l.src, c]].saturating_sub(g);
        }
        self.residual_eta_tx[l.src] -= self.tau[link];
        self.residual_eta_rx[l.dst] = self.residual_eta_rx[l.dst].saturating_sub(1);
    }

    pub fn mute(&mut self, link: LinkId) {
        self.x[link] = Decision::Muted;
        self.mu.row_mut(link).fill(0);
    }

    /// Mutes whatever is still undecided and returns the final assignment.
    pub fn finish(mut self) -> RateAssignment {
        for e in 0..self.x.len() {
            if self.is_undecided(e) {
                self.mute(e);
            }
        }
        RateAssignment {
            gamma: self.gamma,
            mu: self.mu,
            w: self.w,
            x: self.x,
        }
    }
}

/// `a` beats `b` in a contention: higher weight, ties to the lower id.
pub(crate) fn beats(w: &[f64], a: LinkId, b: LinkId) -> bool {
    w[a] > w[b] || (w[a] == w[b] && a < b)
}
