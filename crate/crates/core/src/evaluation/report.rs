use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{relative_error, summarize, Summary};
use super::suites::{SuiteTag, TestFunctionSuite};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Serial,
    UniformCmc,
    GaussianCmc,
    Vcmc,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Serial => "serial",
            Algorithm::UniformCmc => "uniform_cmc",
            Algorithm::GaussianCmc => "gaussian_cmc",
            Algorithm::Vcmc => "vcmc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Algorithm::Serial),
            "uniform_cmc" => Ok(Algorithm::UniformCmc),
            "gaussian_cmc" => Ok(Algorithm::GaussianCmc),
            "vcmc" => Ok(Algorithm::Vcmc),
            other => Err(Error::Format(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionResult {
    pub function: String,
    pub estimate: f64,
    pub reference: f64,
    /// `None` when the reference is too close to zero or the function was
    /// trimmed.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub algorithm: Algorithm,
    pub suite: SuiteTag,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n_functions: usize,
    pub n_excluded: usize,
    #[serde(skip)]
    pub functions: Vec<FunctionResult>,
}

impl EvaluationReport {
    /// Relative errors of `estimates` against `references`; functions with
    /// `mask[i] == false` are excluded along with near-zero references.
    pub fn new(
        algorithm: Algorithm,
        suite: &TestFunctionSuite,
        k: Option<usize>,
        estimates: &[f64],
        references: &[f64],
        mask: Option<&[bool]>,
    ) -> Result<Self> {
        Error::check_dim(suite.len(), estimates.len())?;
        Error::check_dim(suite.len(), references.len())?;
        if let Some(m) = mask {
            Error::check_dim(suite.len(), m.len())?;
        }
        let functions: Vec<FunctionResult> = suite
            .functions()
            .iter()
            .enumerate()
            .map(|(i, f)| FunctionResult {
                function: f.name(),
                estimate: estimates[i],
                reference: references[i],
                error: if mask.is_none_or(|m| m[i]) {
                    relative_error(estimates[i], references[i]).ok()
                } else {
                    None
                },
            })
            .collect();
        let errors: Vec<Option<f64>> = functions.iter().map(|f| f.error).collect();
        let Summary {
            median,
            q1,
            q3,
            n_functions,
            n_excluded,
        } = summarize(&errors)?;
        Ok(EvaluationReport {
            algorithm,
            suite: suite.tag(),
            k,
            median,
            q1,
            q3,
            n_functions,
            n_excluded,
            functions,
        })
    }

    pub fn errors(&self) -> Vec<Option<f64>> {
        self.functions.iter().map(|f| f.error).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Long-form rows `algorithm,suite,K,function,estimate,reference,error`.
    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        if header {
            out.write_record(["algorithm", "suite", "K", "function", "estimate", "reference", "error"])
                .map_err(fmt)?;
        }
        let k = self.k.map(|k| k.to_string()).unwrap_or_default();
        for f in &self.functions {
            out.write_record([
                self.algorithm.as_str(),
                self.suite.as_str(),
                &k,
                &f.function,
                &format!("{:?}", f.estimate),
                &format!("{:?}", f.reference),
                &f.error.map(|e| format!("{e:?}")).unwrap_or_default(),
            ])
            .map_err(fmt)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ParamShape;

    #[test]
    fn identical_estimates_give_zero_medians() {
        let suite = TestFunctionSuite::new(SuiteTag::FirstMoments, ParamShape::Vector { d: 3 }, 0).unwrap();
        let r = EvaluationReport::new(Algorithm::Serial, &suite, Some(1), &[1.0, 0.0, -2.0], &[1.0, 0.0, -2.0], None).unwrap();
        assert_eq!((r.median, r.q1, r.q3), (0.0, 0.0, 0.0));
        assert_eq!((r.n_functions, r.n_excluded), (2, 1));
        let json = r.to_json().unwrap();
        assert!(json.contains("\"algorithm\": \"serial\"") && json.contains("\"n_excluded\": 1"));
        let mut buf = Vec::new();
        r.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("serial,first_moments,1,theta[1],0.0,0.0,\n"));
    }
}
