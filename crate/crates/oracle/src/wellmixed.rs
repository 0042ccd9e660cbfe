//! Mass-action kinetics of `A + B <-> C` without space.
//!
//! When every field is uniform and no potentials act, the concentration
//! means obey the closed ODE system `a' = b' = -lambda a b + mu c`,
//! `c' = lambda a b - mu c`. This module integrates it to near machine
//! precision with an embedded Dormand-Prince pair, as an independent target
//! for the spatial solvers run in the uniform reaction-only regime.

use crate::error::OracleError;

/// Concentrations `[a, b, c]` at time `t` for the well-mixed system started
/// from `init` at time zero.
pub fn wellmixed_ode(init: [f64; 3], lambda: f64, mu: f64, t: f64) -> Result<[f64; 3], OracleError> {
    Ok(*wellmixed_series(init, lambda, mu, &[t])?
        .last()
        .expect("one requested time yields one sample"))
}

/// Concentrations at each requested time, which must be nonnegative and
/// nondecreasing. One integration pass serves all of them.
pub fn wellmixed_series(
    init: [f64; 3],
    lambda: f64,
    mu: f64,
    times: &[f64],
) -> Result<Vec<[f64; 3]>, OracleError> {
    if init.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "initial concentrations must be finite and nonnegative, got {init:?}"
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0 && mu.is_finite() && mu >= 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "rate constants must be finite and nonnegative, got lambda = {lambda}, mu = {mu}"
        )));
    }
    let monotone = times.windows(2).all(|w| w[0] <= w[1]);
    if !monotone || times.first().map_or(false, |&t| t < 0.0) {
        return Err(OracleError::InvalidInput(
            "requested times must be nonnegative and nondecreasing".into(),
        ));
    }

    let rhs = |y: &[f64; 3]| -> [f64; 3] {
        let flux = lambda * y[0] * y[1] - mu * y[2];
        [-flux, -flux, flux]
    };

    let mut out = Vec::with_capacity(times.len());
    let mut y = init;
    let mut now = 0.0;
    let mut dt = 1e-3_f64;
    const TOL: f64 = 1e-12;
    for &target in times {
        while now < target {
            let mut step = dt.min(target - now);
            loop {
                let (y_next, err) = dormand_prince_step(&rhs, &y, step);
                let scale: f64 = y
                    .iter()
                    .map(|x| x.abs())
                    .fold(1.0f64, f64::max);
                let tol = TOL * scale;
                if err <= tol || step <= 1e-14 {
                    y = y_next;
                    now += step;
                    // Standard controller for a 5th-order advancing solution.
                    let growth = if err > 0.0 {
                        0.9 * (tol / err).powf(0.2)
                    } else {
                        5.0
                    };
                    dt = (step * growth.clamp(0.2, 5.0)).min(1.0e6);
                    break;
                }
                step *= 0.9 * (tol / err).powf(0.2).clamp(0.1, 0.9);
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// One embedded Dormand-Prince 5(4) step; returns the 5th-order solution and
/// the embedded error estimate.
fn dormand_prince_step(
    rhs: &dyn Fn(&[f64; 3]) -> [f64; 3],
    y: &[f64; 3],
    h: f64,
) -> ([f64; 3], f64) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // Difference between the 5th- and embedded 4th-order weights.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs(y);
    for stage in 1..7 {
        let mut arg = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let w = h * A[stage - 1][j];
            if w != 0.0 {
                for d in 0..3 {
                    arg[d] += w * kj[d];
                }
            }
        }
        k[stage] = rhs(&arg);
    }
    // The 7th stage already evaluates at the 5th-order solution (FSAL), so
    // its argument is the advanced state.
    let mut y5 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let w = h * A[5][j];
        for d in 0..3 {
            y5[d] += w * kj[d];
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..3 {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[d];
        }
        err = err.max((h * e).abs());
    }
    (y5, err)
}
