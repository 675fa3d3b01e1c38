//! Direct time integration of the full system on `[−L, L]` with Neumann ends.
//!
//! Second-order IMEX (SBDF2): diffusion implicit through a tridiagonal solve,
//! reaction explicit by second-order extrapolation. The first step is IMEX Euler.

use crate::error::{Error, Result};
use crate::fast_field::FastFront;
use crate::grid;
use crate::model::{ModelParams, ReactionSpec};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Largest accepted time step; bounds `dt·|∂f/∂U|` for the explicit reaction.
pub const DT_MAX: f64 = 0.1;
/// `max|U|` above which the background is no longer watched.
pub const BACKGROUND_WATCH: f64 = 10.0;
/// Share of the run, from the end, used for the growth-rate fit.
pub const FIT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub half_width: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub bc: Boundary,
    pub blowup_threshold: f64,
    pub collapse_threshold: f64,
    /// Time between entries of the norm series.
    pub sample_interval: f64,
    /// Amplitude `δ` of a bump `δ·exp(−x²)` added to the initial `V`.
    pub v_bump: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            half_width: 50.0,
            n: 2048,
            dt: 0.01,
            t_final: 200.0,
            bc: Boundary::Neumann,
            blowup_threshold: 1e3,
            collapse_threshold: 1e-3,
            sample_interval: 1.0,
            v_bump: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return Err(Error::Grid(format!("N = {} must be even and at least 8", self.n)));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::Grid(format!("half-width {} must be positive", self.half_width)));
        }
        if !(self.dt > 0.0 && self.dt <= DT_MAX) {
            return Err(Error::InvalidParameter(format!("dt = {} outside (0, {DT_MAX}]", self.dt)));
        }
        if !(self.t_final > 0.0 && self.sample_interval > 0.0) {
            return Err(Error::InvalidParameter("t_final and sample_interval must be positive".into()));
        }
        if !(self.collapse_threshold < self.blowup_threshold) {
            return Err(Error::InvalidParameter("collapse threshold must lie below the blow-up threshold".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        grid::uniform(self.half_width, self.n)
    }
}

/// Current fields plus the reaction history needed by the two-step scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    history: Option<History>,
}

#[derive(Debug, Clone, PartialEq)]
struct History {
    u: Vec<f64>,
    v: Vec<f64>,
    fu: Vec<f64>,
    fv: Vec<f64>,
}

impl SimState {
    pub fn new(x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != x.len() || v.len() != x.len() {
            return Err(Error::Grid("field lengths differ from the grid".into()));
        }
        Ok(Self { t: 0.0, x, u, v, history: None })
    }

    pub fn max_u(&self) -> f64 {
        max_abs(&self.u)
    }

    pub fn max_v(&self) -> f64 {
        max_abs(&self.v)
    }

    /// Zero crossing of `U` closest to the origin, by linear interpolation.
    pub fn front_position(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.u.len() - 1 {
            let (a, b) = (self.u[i], self.u[i + 1]);
            if a == 0.0 || a * b < 0.0 {
                let s = a / (a - b);
                let p = self.x[i] + s * (self.x[i + 1] - self.x[i]);
                if best.is_none_or(|q| p.abs() < q.abs()) {
                    best = Some(p);
                }
            }
        }
        best
    }

    /// Largest distance of the two end nodes from the backgrounds `(∓1, 0)`.
    pub fn background_deviation(&self) -> f64 {
        let n = self.x.len();
        [(0, -1.0), (n - 1, 1.0)]
            .iter()
            .map(|&(i, s)| (self.u[i] - s).abs().max(self.v[i].abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,U,V")?;
        for i in 0..self.x.len() {
            writeln!(out, "{:.17e},{:.17e},{:.17e}", self.x[i], self.u[i], self.v[i])?;
        }
        Ok(())
    }
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// `V = v0·exp(−κ|x|)` with κ the slow decay rate and `U = u0(x/ε; V(x))`,
/// the fast front at the local slow level, which equals `u0(x/ε; v0)` in the
/// core and starts on the slow manifolds `±√(1+V)` in the tails.
///
/// A nonzero `config.v_bump` kicks the core along the slow direction while
/// leaving the tails untouched.
///
/// End values are copied from their neighbours so the data has zero slope there.
pub fn initial_front(config: &SimConfig, params: &ModelParams, v0: f64) -> Result<SimState> {
    config.validate()?;
    params.validate()?;
    FastFront::new(v0).map_err(|e| Error::Grid(format!("initial front: {e}")))?;
    let x = config.grid()?;
    let kappa = params.slow_decay_rate();
    let eps = params.epsilon;
    let mut v: Vec<f64> =
        x.iter().map(|&xi| v0 * (-kappa * xi.abs()).exp() + config.v_bump * (-xi * xi).exp()).collect();
    let mut u = Vec::with_capacity(x.len());
    for (&xi, &vi) in x.iter().zip(&v) {
        u.push(FastFront::new(vi)?.u0(xi / eps));
    }
    let n = x.len();
    for f in [&mut u, &mut v] {
        f[0] = f[1];
        f[n - 1] = f[n - 2];
    }
    SimState::new(x, u, v)
}

/// LU factors of `α·I − β·Δ` with `Δ` the Neumann second difference.
#[derive(Debug, Clone)]
struct Tridiagonal {
    sub: Vec<f64>,
    sup: Vec<f64>,
    /// Reciprocal pivots.
    piv: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, h: f64, alpha: f64, beta: f64) -> Self {
        let r = beta / (h * h);
        let diag = alpha + 2.0 * r;
        let mut sub = vec![-r; n];
        let mut sup = vec![-r; n];
        // ghost mirror: u_{−1} = u_1, u_n = u_{n−2}
        sup[0] = -2.0 * r;
        sub[n - 1] = -2.0 * r;
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
        let mut piv = vec![0.0; n];
        piv[0] = 1.0 / diag;
        for i in 1..n {
            let m = sub[i] * piv[i - 1];
            piv[i] = 1.0 / (diag - m * sup[i - 1]);
        }
        Self { sub, sup, piv }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        c[0] = rhs[0] * self.piv[0];
        for i in 1..n {
            c[i] = (rhs[i] - self.sub[i] * c[i - 1]) * self.piv[i];
        }
        rhs[n - 1] = c[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = c[i] - self.piv[i] * self.sup[i] * rhs[i + 1];
        }
    }
}

type ReactionFn = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;

/// Time stepper with the tridiagonal factors cached.
pub struct Integrator {
    dt: f64,
    reaction: Box<ReactionFn>,
    euler: [Tridiagonal; 2],
    sbdf2: [Tridiagonal; 2],
}

impl Integrator {
    pub fn new(config: &SimConfig, params: &ModelParams, spec: &ReactionSpec) -> Result<Self> {
        let p = *params;
        let spec = spec.clone();
        let reaction = move |u: f64, v: f64| {
            let usq = u * u;
            let w = 1.0 + v - usq;
            (w * u, (w * spec.h(usq, v) + p.slow_source(&spec, v).0) / p.tau)
        };
        Self::with_reaction(config, params, reaction)
    }

    /// Same diffusion with a caller-supplied reaction `(U, V) ↦ (R_U, R_V/τ)`.
    pub fn with_reaction(
        config: &SimConfig,
        params: &ModelParams,
        reaction: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        let (n, dt) = (config.n, config.dt);
        let h = 2.0 * config.half_width / (n - 1) as f64;
        let diff = [params.epsilon * params.epsilon, 1.0 / params.tau];
        Ok(Self {
            dt,
            reaction: Box::new(reaction),
            euler: diff.map(|d| Tridiagonal::new(n, h, 1.0, dt * d)),
            sbdf2: diff.map(|d| Tridiagonal::new(n, h, 1.5, dt * d)),
        })
    }

    fn react(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        u.iter().zip(v).map(|(&a, &b)| (self.reaction)(a, b)).unzip()
    }

    pub fn step(&self, state: &mut SimState) -> Result<()> {
        let dt = self.dt;
        let (fu, fv) = self.react(&state.u, &state.v);
        let (mut u, mut v) = match &state.history {
            None => {
                let mut u: Vec<f64> = state.u.iter().zip(&fu).map(|(a, f)| a + dt * f).collect();
                let mut v: Vec<f64> = state.v.iter().zip(&fv).map(|(a, f)| a + dt * f).collect();
                self.euler[0].solve(&mut u);
                self.euler[1].solve(&mut v);
                (u, v)
            }
            Some(h) => {
                let rhs = |cur: &[f64], old: &[f64], f: &[f64], f_old: &[f64]| -> Vec<f64> {
                    (0..cur.len()).map(|i| 2.0 * cur[i] - 0.5 * old[i] + dt * (2.0 * f[i] - f_old[i])).collect()
                };
                let mut u = rhs(&state.u, &h.u, &fu, &h.fu);
                let mut v = rhs(&state.v, &h.v, &fv, &h.fv);
                self.sbdf2[0].solve(&mut u);
                self.sbdf2[1].solve(&mut v);
                (u, v)
            }
        };
        std::mem::swap(&mut u, &mut state.u);
        std::mem::swap(&mut v, &mut state.v);
        state.history = Some(History { u, v, fu, fv });
        state.t += dt;
        if !(state.u.iter().chain(&state.v).all(|x| x.is_finite())) {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(())
    }
}

/// One step; rebuilds the factors, so loops should hold an [`Integrator`].
pub fn step(state: &SimState, config: &SimConfig, params: &ModelParams, spec: &ReactionSpec) -> Result<SimState> {
    let mut next = state.clone();
    Integrator::new(config, params, spec)?.step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Verdict {
    Persists,
    BlowUp { t_blow: f64 },
    /// `rate` is absent unless `max|V|` grew monotonically over the fit window.
    Collapse { t_collapse: f64, rate: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSample {
    pub t: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub front_position: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub verdict: Verdict,
    /// Change of the front position from `t = 0`; NaN once the front is gone.
    pub drift: f64,
    pub t_end: f64,
    /// Worst background deviation while `max|U| ≤ BACKGROUND_WATCH`.
    pub background_deviation: f64,
    pub norm_series: Vec<NormSample>,
}

impl SimOutcome {
    pub fn write_series_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,max_u,max_v,front_position")?;
        for s in &self.norm_series {
            let pos = s.front_position.map_or(String::new(), |p| format!("{p:.15e}"));
            writeln!(out, "{:.6},{:.15e},{:.15e},{}", s.t, s.max_u, s.max_v, pos)?;
        }
        Ok(())
    }
}

fn sample(state: &SimState) -> NormSample {
    NormSample { t: state.t, max_u: state.max_u(), max_v: state.max_v(), front_position: state.front_position() }
}

/// Least-squares slope of `ln max|V|` over the final [`FIT_FRACTION`] of the series.
pub fn fit_growth_rate(series: &[NormSample]) -> Option<f64> {
    let t_end = series.last()?.t;
    let t0 = series.first()?.t;
    let start = t_end - FIT_FRACTION * (t_end - t0);
    let window: Vec<&NormSample> = series.iter().filter(|s| s.t >= start).collect();
    if window.len() < 3 || window.windows(2).any(|w| !(w[1].max_v > w[0].max_v)) {
        return None;
    }
    let n = window.len() as f64;
    let (st, sy) = window.iter().fold((0.0, 0.0), |(a, b), s| (a + s.t, b + s.max_v.ln()));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = window
        .iter()
        .fold((0.0, 0.0), |(a, b), s| (a + (s.t - mt) * (s.max_v.ln() - my), b + (s.t - mt) * (s.t - mt)));
    Some(num / den)
}

/// Runs from the initial front at level `v0`, calling `observe` at every sample.
pub fn simulate(
    config: &SimConfig,
    params: &ModelParams,
    spec: &ReactionSpec,
    v0: f64,
    mut observe: impl FnMut(&SimState),
) -> Result<SimOutcome> {
    let mut state = initial_front(config, params, v0)?;
    let stepper = Integrator::new(config, params, spec)?;
    let every = ((config.sample_interval / config.dt).round() as usize).max(1);
    let steps = (config.t_final / config.dt).round() as usize;
    let x0 = state.front_position();
    let mut series = vec![sample(&state)];
    observe(&state);
    let mut background = state.background_deviation();
    let mut blow_up = None;
    let mut collapse = None;
    for k in 1..=steps {
        if let Err(e) = stepper.step(&mut state) {
            log::debug!("{e}");
            blow_up = Some(state.t);
            break;
        }
        let max_u = state.max_u();
        if max_u <= BACKGROUND_WATCH {
            background = background.max(state.background_deviation());
        }
        if max_u > config.blowup_threshold {
            blow_up = Some(state.t);
            break;
        }
        // a collapsed front keeps running so that the growth fit sees the background law
        if collapse.is_none() && max_u < config.collapse_threshold {
            collapse = Some(state.t);
        }
        if k % every == 0 {
            series.push(sample(&state));
            observe(&state);
        }
    }
    if series.last().is_none_or(|s| s.t < state.t) && state.u.iter().all(|x| x.is_finite()) {
        series.push(sample(&state));
        observe(&state);
    }
    let verdict = match (blow_up, collapse) {
        (Some(t_blow), _) => Verdict::BlowUp { t_blow },
        (None, Some(t_collapse)) => Verdict::Collapse { t_collapse, rate: fit_growth_rate(&series) },
        (None, None) => Verdict::Persists,
    };
    let drift = match (x0, state.front_position()) {
        (Some(a), Some(b)) if verdict == Verdict::Persists => (b - a).abs(),
        _ => f64::NAN,
    };
    Ok(SimOutcome { verdict, drift, t_end: state.t, background_deviation: background, norm_series: series })
}

/// [`simulate`] without an observer.
pub fn run_and_classify(config: &SimConfig, params: &ModelParams, spec: &ReactionSpec, v0: f64) -> Result<SimOutcome> {
    simulate(config, params, spec, v0, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_the_operator() {
        let (n, h, alpha, beta) = (9, 0.3, 1.5, 0.7);
        let t = Tridiagonal::new(n, h, alpha, beta);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64).collect();
        let r = beta / (h * h);
        let lap = |i: usize| {
            let l = if i == 0 { x[1] } else { x[i - 1] };
            let rr = if i == n - 1 { x[n - 2] } else { x[i + 1] };
            l - 2.0 * x[i] + rr
        };
        let mut b: Vec<f64> = (0..n).map(|i| alpha * x[i] - r * lap(i)).collect();
        t.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn growth_fit_recovers_an_exponential() {
        let series: Vec<NormSample> = (0..=40)
            .map(|k| {
                let t = k as f64;
                NormSample { t, max_u: 1.0, max_v: 0.3 * (0.02 * t).exp(), front_position: None }
            })
            .collect();
        assert!((fit_growth_rate(&series).unwrap() - 0.02).abs() < 1e-12);
        let mut flat = series.clone();
        flat.last_mut().unwrap().max_v = 0.0;
        assert_eq!(fit_growth_rate(&flat), None);
    }
}
