use std::fmt::Write as _;

use super::{Demographics, HillParams, ModelError, PkParams, PkPreset, Sex};
use crate::Scalar;

/// One row of the reference cohort table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortRow {
    pub id: u32,
    pub age: u32,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub sex: Sex,
    pub ce50: f64,
    pub gamma: f64,
    pub e0: f64,
    pub emax: f64,
}

#[allow(clippy::too_many_arguments)]
const fn row(
    id: u32,
    age: u32,
    height_cm: f64,
    weight_kg: f64,
    sex: Sex,
    ce50: f64,
    gamma: f64,
    e0: f64,
    emax: f64,
) -> CohortRow {
    CohortRow {
        id,
        age,
        height_cm,
        weight_kg,
        sex,
        ce50,
        gamma,
        e0,
        emax,
    }
}

use Sex::{Female as F, Male as M};

/// The 13 reference patients. Row 13 is a fictitious individual built
/// from the averages of rows 1-12.
pub const COHORT_TABLE: [CohortRow; 13] = [
    row(1, 40, 163.0, 54.0, F, 6.33, 2.24, 98.8, 94.10),
    row(2, 36, 163.0, 50.0, F, 6.76, 4.29, 98.6, 86.00),
    row(3, 28, 164.0, 52.0, F, 8.44, 4.10, 91.2, 80.70),
    row(4, 50, 163.0, 83.0, F, 6.44, 2.18, 95.9, 102.00),
    row(5, 28, 164.0, 60.0, M, 4.93, 2.46, 94.7, 85.30),
    row(6, 43, 163.0, 59.0, F, 12.00, 2.42, 90.2, 147.00),
    row(7, 37, 187.0, 75.0, M, 8.02, 2.10, 92.0, 104.00),
    row(8, 38, 174.0, 80.0, F, 6.56, 4.12, 95.5, 76.40),
    row(9, 41, 170.0, 70.0, F, 6.15, 6.89, 89.2, 63.80),
    row(10, 37, 167.0, 58.0, F, 13.70, 1.65, 83.1, 151.00),
    row(11, 42, 179.0, 78.0, M, 4.82, 1.85, 91.8, 77.90),
    row(12, 34, 172.0, 58.0, F, 4.95, 1.84, 96.2, 90.80),
    row(13, 38, 169.0, 65.0, F, 7.42, 3.00, 93.1, 96.58),
];

/// Id of the fictitious average patient.
pub const AVERAGE_PATIENT_ID: u32 = 13;

impl CohortRow {
    pub fn lookup(id: u32) -> Option<&'static CohortRow> {
        COHORT_TABLE.iter().find(|r| r.id == id)
    }
}

/// The simulated plant: covariates, derived PK and individual Hill curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualPatient<T> {
    pub id: u32,
    pub demographics: Demographics<T>,
    pub pk: PkParams<T>,
    pub hill: HillParams<T>,
    pub preset: PkPreset,
    /// True for the fictitious cohort-average individual.
    pub is_average: bool,
}

impl<T: Scalar> VirtualPatient<T> {
    /// Builds a patient, deriving PK from the demographics with `preset`.
    pub fn new(
        id: u32,
        demographics: Demographics<T>,
        hill: HillParams<T>,
        preset: PkPreset,
    ) -> Result<Self, ModelError> {
        let pk = PkParams::derive(&demographics, preset)?;
        Ok(Self {
            id,
            demographics,
            pk,
            hill,
            preset,
            is_average: false,
        })
    }

    pub fn from_row(row: &CohortRow, preset: PkPreset) -> Result<Self, ModelError> {
        let demo = Demographics::new(row.age, T::lit(row.height_cm), T::lit(row.weight_kg), row.sex)?;
        let hill = HillParams::new(T::lit(row.e0), T::lit(row.emax), T::lit(row.ce50), T::lit(row.gamma))?;
        let mut p = Self::new(row.id, demo, hill, preset)?;
        p.is_average = row.id == AVERAGE_PATIENT_ID;
        Ok(p)
    }

    /// Looks up a built-in cohort member by its 1-based id.
    pub fn builtin(id: u32, preset: PkPreset) -> Result<Self, ModelError> {
        let row = CohortRow::lookup(id).ok_or(ModelError::UnknownPatient(id))?;
        Self::from_row(row, preset)
    }
}

/// The 13 built-in patients with PK derived under `preset`.
pub fn builtin_cohort<T: Scalar>(preset: PkPreset) -> Result<Vec<VirtualPatient<T>>, ModelError> {
    COHORT_TABLE
        .iter()
        .map(|r| VirtualPatient::from_row(r, preset))
        .collect()
}

/// Cohort table as CSV, numbers printed at the table's own precision.
pub fn cohort_csv() -> String {
    cohort_table(',', "id,age,height_cm,weight_kg,sex,ce50,gamma,e0,emax")
}

/// Cohort table as tab-separated text in the layout of the published table.
pub fn cohort_tsv() -> String {
    cohort_table('\t', "Id\tAge\tHeight[cm]\tWeight[kg]\tSex\tCe50\tgamma\tE0\tEmax")
}

fn cohort_table(sep: char, header: &str) -> String {
    let mut out = format!("{header}\n");
    for r in &COHORT_TABLE {
        let fields = [
            r.id.to_string(),
            r.age.to_string(),
            format!("{:.0}", r.height_cm),
            format!("{:.0}", r.weight_kg),
            r.sex.code().to_string(),
            format!("{:.2}", r.ce50),
            format!("{:.2}", r.gamma),
            format!("{:.1}", r.e0),
            format!("{:.2}", r.emax),
        ];
        let _ = writeln!(out, "{}", fields.join(&sep.to_string()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_and_last_rows() {
        let c = builtin_cohort::<f64>(PkPreset::SchniderCorrected).unwrap();
        assert_eq!(c.len(), 13);
        let p1 = &c[0];
        assert_eq!(
            (p1.demographics.age, p1.demographics.height_cm, p1.demographics.weight_kg, p1.demographics.sex),
            (40, 163.0, 54.0, Sex::Female)
        );
        assert_eq!((p1.hill.ce50, p1.hill.gamma, p1.hill.e0, p1.hill.emax), (6.33, 2.24, 98.8, 94.10));
        assert!(!p1.is_average);
        let p13 = &c[12];
        assert_eq!(
            (p13.demographics.age, p13.demographics.height_cm, p13.demographics.weight_kg, p13.demographics.sex),
            (38, 169.0, 65.0, Sex::Female)
        );
        assert_eq!((p13.hill.ce50, p13.hill.gamma, p13.hill.e0, p13.hill.emax), (7.42, 3.00, 93.1, 96.58));
        assert!(p13.is_average);
    }

    #[test]
    fn ce50_column_mean_matches_average_patient() {
        let mean = COHORT_TABLE[..12].iter().map(|r| r.ce50).sum::<f64>() / 12.0;
        assert!((mean - 7.425).abs() < 1e-12);
        assert!((mean - COHORT_TABLE[12].ce50).abs() < 0.01);
    }

    #[test]
    fn pk_matches_derivation() {
        for p in builtin_cohort::<f64>(PkPreset::SchniderCorrected).unwrap() {
            assert_eq!(p.pk, PkParams::derive(&p.demographics, p.preset).unwrap());
        }
    }

    #[test]
    fn uncorrected_cohort_fails() {
        assert!(builtin_cohort::<f64>(PkPreset::Uncorrected).is_err());
    }

    #[test]
    fn unknown_id() {
        assert_eq!(
            VirtualPatient::<f64>::builtin(14, PkPreset::SchniderCorrected).unwrap_err(),
            ModelError::UnknownPatient(14)
        );
    }

    #[test]
    fn csv_shape() {
        let csv = cohort_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 14);
        assert_eq!(lines[1], "1,40,163,54,F,6.33,2.24,98.8,94.10");
        assert_eq!(lines[13], "13,38,169,65,F,7.42,3.00,93.1,96.58");
    }
}
