//! Model definitions: right-hand side, delay and equilibrium description.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::expr::{Expr, Var};
use super::parser::{parse_with_constants, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("model file: {0}")]
    Format(String),
    #[error("in `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Bracketing interval for an implicit equilibrium, as expressions in `lam`, `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub lo: Expr,
    pub hi: Expr,
}

impl Bracket {
    /// `(1e-12, 1 - 1/lam - 1e-12)`: the endemic branch of an SIS-type model
    /// with `lam` playing the reproduction number.
    pub fn sis_default() -> Bracket {
        Bracket {
            lo: super::parse("1e-12").expect("literal"),
            hi: super::parse("1 - 1/lam - 1e-12").expect("literal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equilibrium {
    /// `ybar = expr(lam, mu)`.
    Explicit(Expr),
    /// `ybar` solves `residual(x, lam, mu) = 0` inside the bracket.
    Implicit { residual: Expr, bracket: Bracket },
}

/// A scalar DDE `x'(t) = rhs(x(t), x(t - tau), lam, mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub rhs: Expr,
    pub tau: f64,
    pub equilibrium: Equilibrium,
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        rhs: Expr,
        tau: f64,
        equilibrium: Equilibrium,
    ) -> Result<ModelSpec, ModelError> {
        let m = ModelSpec { name: name.into(), rhs, tau, equilibrium };
        m.validate()?;
        Ok(m)
    }

    pub fn with_tau(&self, tau: f64) -> Result<ModelSpec, ModelError> {
        ModelSpec::new(self.name.clone(), self.rhs.clone(), tau, self.equilibrium.clone())
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(ModelError::Invalid(format!("tau must be positive, got {}", self.tau)));
        }
        let state_free = |e: &Expr| !e.references(Var::X) && !e.references(Var::Xd);
        match &self.equilibrium {
            Equilibrium::Explicit(e) => {
                if !state_free(e) {
                    return Err(ModelError::Invalid(
                        "explicit equilibrium may depend only on lam and mu".into(),
                    ));
                }
            }
            Equilibrium::Implicit { residual, bracket } => {
                if !residual.references(Var::X) {
                    return Err(ModelError::Invalid("implicit residual must depend on x".into()));
                }
                if residual.references(Var::Xd) {
                    return Err(ModelError::Invalid("implicit residual may not reference xd".into()));
                }
                if !state_free(&bracket.lo) || !state_free(&bracket.hi) {
                    return Err(ModelError::Invalid(
                        "bracket endpoints may depend only on lam and mu".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Parse a model file (see `docs/model-file.md`).
    pub fn from_toml(src: &str) -> Result<ModelSpec, ModelError> {
        let raw: RawModel = toml::from_str(src).map_err(|e| ModelError::Format(e.to_string()))?;
        let consts = raw.constants.unwrap_or_default();
        let expr = |field: &str, s: &str| {
            parse_with_constants(s, &consts)
                .map_err(|source| ModelError::Expr { field: field.to_string(), source })
        };
        let rhs = expr("rhs", &raw.rhs)?;
        let equilibrium = match (raw.equilibrium.explicit, raw.equilibrium.residual) {
            (Some(e), None) => Equilibrium::Explicit(expr("equilibrium.explicit", &e)?),
            (None, Some(r)) => {
                let bracket = match raw.equilibrium.bracket {
                    Some([lo, hi]) => Bracket {
                        lo: expr("equilibrium.bracket[0]", &lo)?,
                        hi: expr("equilibrium.bracket[1]", &hi)?,
                    },
                    None => Bracket::sis_default(),
                };
                Equilibrium::Implicit { residual: expr("equilibrium.residual", &r)?, bracket }
            }
            _ => {
                return Err(ModelError::Invalid(
                    "equilibrium needs exactly one of `explicit` or `residual`".into(),
                ))
            }
        };
        ModelSpec::new(raw.name, rhs, raw.tau, equilibrium)
    }

    /// Model-file text describing this model.
    pub fn to_toml(&self) -> String {
        let mut s = format!(
            "name = {:?}\ntau = {:?}\nrhs = {:?}\n\n[equilibrium]\n",
            self.name,
            self.tau,
            self.rhs.to_string()
        );
        match &self.equilibrium {
            Equilibrium::Explicit(e) => s += &format!("explicit = {:?}\n", e.to_string()),
            Equilibrium::Implicit { residual, bracket } => {
                s += &format!("residual = {:?}\n", residual.to_string());
                s += &format!(
                    "bracket = [{:?}, {:?}]\n",
                    bracket.lo.to_string(),
                    bracket.hi.to_string()
                );
            }
        }
        s
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    tau: f64,
    rhs: String,
    constants: Option<BTreeMap<String, f64>>,
    equilibrium: RawEquilibrium,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquilibrium {
    explicit: Option<String>,
    residual: Option<String>,
    bracket: Option<[String; 2]>,
}

pub const SIS_INVERSE_TOML: &str = include_str!("../../models/sis-inverse.toml");
pub const SIS_EXP_TOML: &str = include_str!("../../models/sis-exp.toml");

/// The SIS model with response `h(y, p) = 1/(1 + p y)`; `lam` is R0 and `mu` is p.
pub fn sis_inverse() -> ModelSpec {
    ModelSpec::from_toml(SIS_INVERSE_TOML).expect("built-in model parses")
}

/// The SIS model with response `h(y, p) = exp(-p y)`; `lam` is R0 and `mu` is p.
pub fn sis_exp() -> ModelSpec {
    ModelSpec::from_toml(SIS_EXP_TOML).expect("built-in model parses")
}

pub fn builtin_models() -> Vec<ModelSpec> {
    vec![sis_inverse(), sis_exp()]
}

pub fn builtin(name: &str) -> Option<ModelSpec> {
    builtin_models().into_iter().find(|m| m.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelkit::Point;

    #[test]
    fn builtins_have_delay_ten() {
        let ms = builtin_models();
        assert_eq!(ms.len(), 2);
        for m in &ms {
            assert_eq!(m.tau, 10.0);
        }
        assert!(matches!(ms[0].equilibrium, Equilibrium::Explicit(_)));
        assert!(matches!(ms[1].equilibrium, Equilibrium::Implicit { .. }));
    }

    #[test]
    fn disease_free_state_is_fixed() {
        let m = sis_inverse();
        assert_eq!(m.rhs.eval_real(&Point::new(0.0, 0.0, 3.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn sis_inverse_rhs_vanishes_at_closed_form_equilibrium() {
        let m = sis_inverse();
        let y = 1.0 / 3.0;
        let r = m.rhs.eval_real(&Point::new(y, y, 2.0, 1.0)).unwrap();
        assert!(r.abs() < 1e-14, "residual {r}");
    }

    #[test]
    fn sis_exp_bracket_changes_sign() {
        let m = sis_exp();
        let Equilibrium::Implicit { residual, bracket } = &m.equilibrium else { unreachable!() };
        for (lam, mu) in [(1.2, 0.5), (2.1474, 1.6617), (5.0, 3.0)] {
            let at = Point::new(0.0, 0.0, lam, mu);
            let lo = bracket.lo.eval_real(&at).unwrap();
            let hi = bracket.hi.eval_real(&at).unwrap();
            let g = |x| residual.eval_real(&Point::new(x, x, lam, mu)).unwrap();
            assert!(lo < hi);
            assert!(g(lo) * g(hi) < 0.0);
        }
    }

    #[test]
    fn toml_roundtrip() {
        for m in builtin_models() {
            let back = ModelSpec::from_toml(&m.to_toml()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn invalid_models_are_rejected() {
        let bad = [
            "name='a'\ntau=0\nrhs='x'\n[equilibrium]\nexplicit='0'",
            "name='a'\ntau=1\nrhs='x'\n[equilibrium]\nexplicit='x'",
            "name='a'\ntau=1\nrhs='x'\n[equilibrium]\nresidual='lam'",
            "name='a'\ntau=1\nrhs='x'\n[equilibrium]\nresidual='xd - 1'",
            "name='a'\ntau=1\nrhs='x'\n[equilibrium]\nexplicit='0'\nresidual='x'",
            "name='a'\ntau=1\nrhs='x +'\n[equilibrium]\nexplicit='0'",
            "name='a'\ntau=1\nrhs='x'\nextra=1\n[equilibrium]\nexplicit='0'",
        ];
        for src in bad {
            assert!(ModelSpec::from_toml(src).is_err(), "{src}");
        }
    }

    #[test]
    fn constants_section_is_inlined() {
        let src = "name='lin'\ntau=1.5\nrhs='a*x + b*xd'\n[constants]\na=-1.0\nb=0.5\n[equilibrium]\nexplicit='0'";
        let m = ModelSpec::from_toml(src).unwrap();
        assert_eq!(m.rhs.eval_real(&Point::new(2.0, 4.0, 0.0, 0.0)).unwrap(), 0.0);
    }
}
