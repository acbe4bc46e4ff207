//! Dormand–Prince 5(4) stepping for a scalar ODE with an admissibility-aware
//! right-hand side: the RHS may refuse a state (returns `None`), which is
//! treated like a failed error test.

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrateError {
    /// Step size fell below the floor; `refused` is set when the last
    /// rejection came from an inadmissible state rather than the error test.
    Underflow {
        r: f64,
        y: f64,
        refused: bool,
    },
    TooManySteps {
        r: f64,
    },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step, relative to `max(|r|, length_scale)`.
    pub h_floor: f64,
    pub length_scale: f64,
    pub max_steps: u64,
}

impl Dopri5 {
    /// Advances from `(r0, y0)` to exactly `r1`. `h` carries the step-size
    /// suggestion across calls. Returns `(y(r1), y'(r1))`.
    pub fn advance<F>(
        &self,
        mut f: F,
        r0: f64,
        y0: f64,
        r1: f64,
        h: &mut f64,
        stats: &mut StepStats,
    ) -> Result<(f64, f64), IntegrateError>
    where
        F: FnMut(f64, f64) -> Option<f64>,
    {
        let mut r = r0;
        let mut y = y0;
        let mut k1 = match f(r, y) {
            Some(d) => d,
            None => {
                return Err(IntegrateError::Underflow {
                    r,
                    y,
                    refused: true,
                })
            }
        };
        stats.evals += 1;
        let mut steps = 0u64;
        loop {
            let remaining = r1 - r;
            if remaining <= 0.0 {
                return Ok((y, k1));
            }
            let floor = self.h_floor * r.abs().max(self.length_scale);
            let landing = *h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { *h };
            steps += 1;
            if steps > self.max_steps {
                return Err(IntegrateError::TooManySteps { r });
            }
            match self.try_step(&mut f, r, y, k1, step, stats) {
                Some((y_new, k7, err)) if err <= 1.0 => {
                    stats.accepted += 1;
                    r = if landing { r1 } else { r + step };
                    y = y_new;
                    k1 = k7;
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // a landing step is usually truncated; keep the larger suggestion
                    *h = if landing {
                        h.max(step * grow)
                    } else {
                        step * grow
                    };
                }
                Some((_, _, err)) => {
                    stats.rejected += 1;
                    *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    if *h < floor {
                        return Err(IntegrateError::Underflow {
                            r,
                            y,
                            refused: false,
                        });
                    }
                }
                None => {
                    stats.rejected += 1;
                    *h = 0.25 * step;
                    if *h < floor {
                        return Err(IntegrateError::Underflow {
                            r,
                            y,
                            refused: true,
                        });
                    }
                }
            }
        }
    }

    fn try_step<F>(
        &self,
        f: &mut F,
        r: f64,
        y: f64,
        k1: f64,
        h: f64,
        stats: &mut StepStats,
    ) -> Option<(f64, f64, f64)>
    where
        F: FnMut(f64, f64) -> Option<f64>,
    {
        let mut k = [0.0; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j];
            }
            stats.evals += 1;
            k[s] = f(r + C[s] * h, y + h * acc)?;
            if !k[s].is_finite() {
                return None;
            }
        }
        // row 7 of A is the fifth-order solution (FSAL)
        let mut incr = 0.0;
        for j in 0..6 {
            incr += A[6][j] * k[j];
        }
        let y_new = y + h * incr;
        let err_abs = h * E.iter().zip(&k).map(|(e, kk)| e * kk).sum::<f64>();
        let sc = self.atol + self.rtol * y.abs().max(y_new.abs());
        Some((y_new, k[6], (err_abs / sc).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stepper(tol: f64) -> Dopri5 {
        Dopri5 {
            rtol: tol,
            atol: tol,
            h_floor: 1e-14,
            length_scale: 1.0,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn exponential_decay() {
        let mut h = 1e-3;
        let mut st = StepStats::default();
        let (y, dy) = stepper(1e-12)
            .advance(|_, y| Some(-y), 0.0, 1.0, 2.0, &mut h, &mut st)
            .unwrap();
        assert!((y - (-2.0f64).exp()).abs() < 1e-11);
        assert!((dy + y).abs() < 1e-15);
        assert!(st.accepted > 0);
    }

    #[test]
    fn fifth_order_global_error_scaling() {
        // tolerance proportionality: tighter tolerance, smaller error
        let run = |tol: f64| {
            let mut h = 1e-2;
            let mut st = StepStats::default();
            let (y, _) = stepper(tol)
                .advance(|r, _| Some(r.cos()), 0.0, 0.0, 10.0, &mut h, &mut st)
                .unwrap();
            (y - 10f64.sin()).abs()
        };
        assert!(run(1e-10) < 1e-8);
        assert!(run(1e-12) < run(1e-8));
    }

    #[test]
    fn refused_states_underflow() {
        // y' = 1 / (1 - y) reaches y = 1 at finite r; states with y >= 1 - 1e-12 are refused
        let mut h = 1e-2;
        let mut st = StepStats::default();
        let res = stepper(1e-10).advance(
            |_, y| {
                if y < 1.0 - 1e-12 {
                    Some(1.0 / (1.0 - y))
                } else {
                    None
                }
            },
            0.0,
            0.0,
            5.0,
            &mut h,
            &mut st,
        );
        match res {
            Err(IntegrateError::Underflow { r, .. }) => assert!((r - 0.5).abs() < 1e-3, "{r}"),
            other => panic!("{other:?}"),
        }
    }
}
