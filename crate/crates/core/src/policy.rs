//! Network-side controller: decides per request whether to run standalone at
//! the primary, standalone at the helper, or cooperatively on both, and picks
//! the device transmit power that exactly meets the deadline. When even
//! `p_max` cannot meet it the device transmits at `p_max` (best effort).

use rand::RngCore;

use crate::compute::{compute_delay_ensemble, compute_delay_standalone, meh_energy, ComputePlanInput};
use crate::config::{CpuDraw, GoalSpec, MehConfig, RadioConfig};
use crate::error::{domain, Result};
use crate::inference::{InferenceOracle, InferenceOutcome};
use crate::radio::{invert_power, uplink_delay, uplink_delay_with_branch, BerBranch};

/// Relative slack on the deadline comparison. Exact-meet plans land on
/// `d_max` up to rounding, which must not count as a delay outage.
pub const DEADLINE_REL_TOL: f64 = 1e-9;

/// Device energy is accounted over at most `ENERGY_DELAY_CAP_FACTOR · d_max`
/// of airtime so that zero-rate trials keep means finite.
pub const ENERGY_DELAY_CAP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecutionMode {
    StandalonePrimary,
    StandaloneHelper,
    Cooperative,
}

impl ExecutionMode {
    pub fn primary_executes(self) -> bool {
        matches!(self, ExecutionMode::StandalonePrimary | ExecutionMode::Cooperative)
    }

    pub fn helper_executes(self) -> bool {
        matches!(self, ExecutionMode::StandaloneHelper | ExecutionMode::Cooperative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionPlan {
    pub mode: ExecutionMode,
    /// W
    pub p_tx: f64,
    pub best_effort: bool,
    /// s; zero when no uplink budget is left
    pub target_uplink_delay: f64,
    /// Margin branch of an exact-meet power; `None` for best effort.
    pub branch: Option<BerBranch>,
    pub branch_ambiguous: bool,
}

pub fn deadline_met(d_tot: f64, goal: &GoalSpec) -> bool {
    d_tot <= goal.d_max * (1.0 + DEADLINE_REL_TOL)
}

/// Exact-meet power against a known compute delay, falling back to best effort.
fn plan_against(radio: &RadioConfig, h: f64, compute_delay: f64, goal: &GoalSpec, mode: ExecutionMode) -> Result<ExecutionPlan> {
    let target = (goal.d_max - compute_delay).max(0.0);
    let best_effort = ExecutionPlan {
        mode,
        p_tx: radio.p_max,
        best_effort: true,
        target_uplink_delay: target,
        branch: None,
        branch_ambiguous: false,
    };
    if target <= 0.0 {
        return Ok(best_effort);
    }
    let sol = invert_power(radio, h, target)?;
    if sol.clamped {
        return Ok(best_effort);
    }
    Ok(ExecutionPlan {
        mode,
        p_tx: sol.p,
        best_effort: false,
        target_uplink_delay: target,
        branch: Some(sol.branch),
        branch_ambiguous: sol.branch_ambiguous,
    })
}

/// Standalone execution at the primary MEH.
pub fn plan_standalone(radio: &RadioConfig, h: f64, draw: &CpuDraw, workload: f64, goal: &GoalSpec) -> Result<ExecutionPlan> {
    plan_against(
        radio,
        h,
        compute_delay_standalone(draw, workload),
        goal,
        ExecutionMode::StandalonePrimary,
    )
}

/// Cooperative execution when the deadline is reachable at `p_max`,
/// otherwise standalone at whichever MEH finishes first (helper delay
/// includes the backhaul round trip; ties go to the primary).
pub fn plan_ensemble(radio: &RadioConfig, h: f64, compute: &ComputePlanInput, goal: &GoalSpec) -> Result<ExecutionPlan> {
    let helper_delay = compute
        .helper_delay()
        .ok_or_else(|| domain("ensemble planning needs a helper draw"))?;
    let ensemble_delay = compute_delay_ensemble(compute)?;
    let min_uplink = uplink_delay(radio, h, radio.p_max)?.delay;
    if min_uplink + ensemble_delay <= goal.d_max {
        return plan_against(radio, h, ensemble_delay, goal, ExecutionMode::Cooperative);
    }
    let primary_delay = compute.primary_delay();
    if helper_delay < primary_delay {
        plan_against(radio, h, helper_delay, goal, ExecutionMode::StandaloneHelper)
    } else {
        plan_against(radio, h, primary_delay, goal, ExecutionMode::StandalonePrimary)
    }
}

/// Everything a trial evaluation needs besides the plan.
#[derive(Debug, Clone, Copy)]
pub struct TrialContext<'a> {
    pub radio: &'a RadioConfig,
    pub h: f64,
    pub primary: &'a MehConfig,
    pub helper: Option<&'a MehConfig>,
    pub compute: ComputePlanInput,
    pub goal: GoalSpec,
}

impl TrialContext<'_> {
    pub fn plan_standalone(&self) -> Result<ExecutionPlan> {
        plan_standalone(
            self.radio,
            self.h,
            &self.compute.primary_draw,
            self.compute.primary_workload,
            &self.goal,
        )
    }

    pub fn plan_ensemble(&self) -> Result<ExecutionPlan> {
        plan_ensemble(self.radio, self.h, &self.compute, &self.goal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub mode: ExecutionMode,
    pub p_tx: f64,
    /// s; infinite when the rate is zero
    pub d_u: f64,
    pub d_c: f64,
    pub d_tot: f64,
    /// J, airtime capped at `ENERGY_DELAY_CAP_FACTOR · d_max`
    pub e_device: f64,
    pub e_meh_p: f64,
    pub e_meh_h: f64,
    pub outcome: InferenceOutcome,
    pub goal_met: bool,
    pub delay_outage: bool,
    pub inference_outage: bool,
    pub best_effort: bool,
    pub uplink_branch: BerBranch,
    pub energy_capped: bool,
    pub branch_ambiguous: bool,
    pub oracle_clamped: bool,
}

impl TrialOutcome {
    pub fn e_mec(&self) -> f64 {
        self.e_meh_p + self.e_meh_h
    }
}

/// Realizes a plan: delays, energies, inference values and goal flags.
pub fn evaluate_trial(
    plan: &ExecutionPlan,
    ctx: &TrialContext<'_>,
    oracle: &dyn InferenceOracle,
    rng: &mut dyn RngCore,
) -> Result<TrialOutcome> {
    let radio = ctx.radio;
    let uplink = match (plan.best_effort, plan.branch) {
        (false, Some(branch)) => uplink_delay_with_branch(radio, ctx.h, plan.p_tx, branch)?,
        _ => uplink_delay(radio, ctx.h, plan.p_tx)?,
    };
    let compute = &ctx.compute;
    let d_c = match plan.mode {
        ExecutionMode::StandalonePrimary => compute.primary_delay(),
        ExecutionMode::StandaloneHelper => compute
            .helper_delay()
            .ok_or_else(|| domain("helper plan without helper draw"))?,
        ExecutionMode::Cooperative => compute_delay_ensemble(compute)?,
    };
    let d_u = uplink.delay;
    let d_tot = d_u + d_c;

    let cap = ENERGY_DELAY_CAP_FACTOR * ctx.goal.d_max;
    let energy_capped = d_u > cap;
    let e_device = plan.p_tx * d_u.min(cap);

    let e_meh_p = if plan.mode.primary_executes() {
        meh_energy(ctx.primary, &compute.primary_draw, compute.primary_workload)
    } else {
        0.0
    };
    let e_meh_h = match (plan.mode.helper_executes(), ctx.helper, compute.helper_draw) {
        (true, Some(meh), Some(draw)) => meh_energy(meh, &draw, compute.helper_workload),
        (true, ..) => return Err(domain("helper plan without helper configuration")),
        _ => 0.0,
    };

    let draw = oracle.draw(rng, radio.ber_target);
    let outcome = InferenceOutcome::for_mode(draw, plan.mode);
    let delay_outage = !deadline_met(d_tot, &ctx.goal);
    let inference_outage = !outcome.theta_agg;
    Ok(TrialOutcome {
        mode: plan.mode,
        p_tx: plan.p_tx,
        d_u,
        d_c,
        d_tot,
        e_device,
        e_meh_p,
        e_meh_h,
        outcome,
        goal_met: !delay_outage && !inference_outage,
        delay_outage,
        inference_outage,
        best_effort: plan.best_effort,
        uplink_branch: uplink.branch,
        energy_capped,
        branch_ambiguous: plan.branch_ambiguous,
        oracle_clamped: draw.clamped,
    })
}
