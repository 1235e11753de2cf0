use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    NonOscillationCertified,
    OscillationCertified,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NonOscillationCertified => "NonOscillationCertified",
            Verdict::OscillationCertified => "OscillationCertified",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Which result a certificate rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// Non-negative solution of the characteristic inequality, `A_k >= 0`.
    T1_3,
    /// Same with signed coefficients (positive parts).
    T2_3,
    /// All coefficients non-positive.
    T3_1,
    /// Window integral with impulse products at most `1/e`.
    T3_2,
    /// Window integral against `1/e` corrected by small multipliers.
    T3_3,
    /// Comparison with a certified problem.
    T4,
    /// Impulse-free equivalent equation.
    T7,
    /// Lower limit of the short-window integral above `1/e`.
    T8_1,
    /// Upper limit of the long-window integral above `1`.
    T8_2,
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremId::T1_3 => "T1.3",
            TheoremId::T2_3 => "T2.3",
            TheoremId::T3_1 => "T3.1",
            TheoremId::T3_2 => "T3.2",
            TheoremId::T3_3 => "T3.3",
            TheoremId::T4 => "T4",
            TheoremId::T7 => "T7",
            TheoremId::T8_1 => "T8.1",
            TheoremId::T8_2 => "T8.2",
        })
    }
}

impl std::str::FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "T1.3" => TheoremId::T1_3,
            "T2.3" => TheoremId::T2_3,
            "T3.1" => TheoremId::T3_1,
            "T3.2" => TheoremId::T3_2,
            "T3.3" => TheoremId::T3_3,
            "T4" => TheoremId::T4,
            "T7" => TheoremId::T7,
            "T8.1" => TheoremId::T8_1,
            "T8.2" => TheoremId::T8_2,
            other => return Err(format!("unknown theorem id {other}")),
        })
    }
}

/// Columns of [`CriterionReport::csv_row`].
pub const CSV_HEADER: &str = "problem_id,theorem,verdict,evidence";

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub verdict: Verdict,
    /// The deciding test, or the last one attempted.
    pub theorem: TheoremId,
    /// The test a transferred certificate was obtained from.
    pub via: Option<TheoremId>,
    pub evidence: Vec<(String, f64)>,
    pub parameters: Vec<(String, f64)>,
    /// Limits were estimated on a finite tail window.
    pub horizon_conditional: bool,
}

impl CriterionReport {
    pub fn new(verdict: Verdict, theorem: TheoremId) -> Self {
        CriterionReport {
            verdict,
            theorem,
            via: None,
            evidence: Vec::new(),
            parameters: Vec::new(),
            horizon_conditional: false,
        }
    }

    pub fn inconclusive(theorem: TheoremId) -> Self {
        Self::new(Verdict::Inconclusive, theorem)
    }

    pub fn with_evidence(mut self, name: &str, value: f64) -> Self {
        self.evidence.push((name.to_string(), value));
        self
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn evidence(&self, name: &str) -> Option<f64> {
        self.evidence
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    /// Same verdict, now attributed to `theorem` and obtained via the old one.
    pub fn relabel(mut self, theorem: TheoremId) -> Self {
        self.via = Some(self.via.unwrap_or(self.theorem));
        self.theorem = theorem;
        self
    }

    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = format!("verdict={}\ntheorem={}\n", self.verdict, self.theorem);
        if let Some(via) = self.via {
            out.push_str(&format!("via={via}\n"));
        }
        out.push_str(&format!(
            "horizon_conditional={}\n",
            self.horizon_conditional
        ));
        for (name, value) in &self.evidence {
            out.push_str(&format!("evidence.{name}={value:.16e}\n"));
        }
        for (name, value) in &self.parameters {
            out.push_str(&format!("parameter.{name}={value:.16e}\n"));
        }
        out
    }

    /// One row under [`CSV_HEADER`]; evidence as `name:value` pairs joined by `;`.
    pub fn csv_row(&self, problem_id: &str) -> String {
        let evidence: Vec<String> = self
            .evidence
            .iter()
            .map(|(name, value)| format!("{name}:{value:.16e}"))
            .collect();
        format!(
            "{problem_id},{},{},{}",
            self.theorem,
            self.verdict,
            evidence.join(";")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializations() {
        let r = CriterionReport::new(Verdict::OscillationCertified, TheoremId::T8_1)
            .with_evidence("liminf", 0.5)
            .with_parameter("grid_n", 2000.0)
            .relabel(TheoremId::T7);
        let kv = r.to_key_value();
        assert!(kv.contains("verdict=OscillationCertified\n"));
        assert!(kv.contains("theorem=T7\nvia=T8.1\n"));
        assert!(kv.contains("evidence.liminf=5.0000000000000000e-1\n"));
        assert_eq!(
            r.csv_row("p1"),
            "p1,T7,OscillationCertified,liminf:5.0000000000000000e-1"
        );
        assert_eq!("T3.2".parse::<TheoremId>().unwrap(), TheoremId::T3_2);
        assert_eq!(TheoremId::T8_2.to_string(), "T8.2");
    }
}
