//! Bracketing root finder (Brent's method, in the formulation used by SciPy's brentq).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("f({a}) and f({b}) have the same sign")]
    NoBracket { a: f64, b: f64 },
    #[error("no convergence after {iterations} iterations (last x = {x})")]
    NotConverged { x: f64, iterations: usize },
}

/// Root of `f` in [xa, xb], accurate to `xtol + rtol·|x|`.
pub fn brent<F>(f: F, xa: f64, xb: f64, xtol: f64, rtol: f64, max_iter: usize) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let mut xpre = xa;
    let mut xcur = xb;
    let mut xblk = 0.0;
    let mut fpre = f(xpre);
    let mut fcur = f(xcur);
    let mut fblk = 0.0;
    let mut spre = 0.0;
    let mut scur = 0.0;

    if fpre == 0.0 {
        return Ok(xpre);
    }
    if fcur == 0.0 {
        return Ok(xcur);
    }
    if fpre.signum() == fcur.signum() {
        return Err(RootError::NoBracket { a: xa, b: xb });
    }

    for _ in 0..max_iter {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        let delta = 0.5 * (xtol + rtol * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(xcur);
        }

        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // Secant step.
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // Inverse quadratic interpolation.
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
    }
    Err(RootError::NotConverged { x: xcur, iterations: max_iter })
}

/// Bisection on a sign change of `f` in [a, b] down to an interval of width `xtol`.
pub fn bisect<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b });
    }
    while (b - a).abs() > xtol {
        let c = 0.5 * (a + b);
        if c == a || c == b {
            break;
        }
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let x = brent(|x| x * x * x - 0.5, 0.0, 1.0, 1e-15, 4.0 * f64::EPSILON, 100).unwrap();
        assert!((x - 0.5f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 1e-15, 100), Err(RootError::NoBracket { .. })));
    }

    #[test]
    fn bisection_cosine() {
        let x = bisect(f64::cos, 1.0, 2.0, 1e-13).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
