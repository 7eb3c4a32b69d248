//! Seeded synthetic student and course populations whose shares and group
//! dropout rates follow published institutional profiles.
//!
//! Each student gets a latent academic risk `r`, shifted by group membership,
//! from which incoming credentials, course load and grades are drawn. Dropout
//! follows `logit p = base + r + kappa * (part_time - share) + gamma . g`, where
//! `gamma` is the residual protected effect not visible through features. The
//! intercept and group shifts are solved on the drawn sample so group dropout
//! rates land on their targets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::cohort::{
    CourseLevel, CourseRecord, CourseType, FeatureConfig, Format, LetterGrade, ProtectedAttribute, StudentRecord,
};
use crate::error::{Error, Result};
use crate::rng::sub_stream;

/// One value per protected attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtectedValues<T> {
    pub gender: T,
    pub first_gen: T,
    pub urm: T,
    pub high_need: T,
}

impl<T: Copy> ProtectedValues<T> {
    pub fn get(&self, attr: ProtectedAttribute) -> T {
        match attr {
            ProtectedAttribute::Gender => self.gender,
            ProtectedAttribute::FirstGen => self.first_gen,
            ProtectedAttribute::Urm => self.urm,
            ProtectedAttribute::HighNeed => self.high_need,
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        ProtectedAttribute::ALL.map(|a| self.get(a))
    }

    pub fn from_array(v: [T; 4]) -> Self {
        Self {
            gender: v[0],
            first_gen: v[1],
            urm: v[2],
            high_need: v[3],
        }
    }
}

/// Dropout rate of the flagged group and of its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub group: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingRates {
    pub hs_gpa: f64,
    pub test_scores: f64,
    pub grades: f64,
    pub major: f64,
}

impl Default for MissingRates {
    fn default() -> Self {
        Self {
            hs_gpa: 0.10,
            test_scores: 0.15,
            grades: 0.05,
            major: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationProfile {
    pub n: usize,
    pub format: Format,
    pub seed: u64,
    /// Share of the flagged group (female, first-gen, URM, high need).
    pub protected_shares: ProtectedValues<f64>,
    pub transfer_share: f64,
    pub part_time_share: f64,
    pub mean_age: f64,
    pub overall_dropout: f64,
    pub group_dropout: ProtectedValues<RatePair>,
    /// Standard deviation of the feature-visible log-odds risk.
    pub feature_effect: f64,
    /// Residual log-odds of each flagged group beyond the features.
    pub protected_effect: ProtectedValues<f64>,
    /// Pairwise latent correlation of the protected flags.
    #[serde(default = "default_correlation")]
    pub protected_correlation: f64,
    #[serde(default = "default_part_time_effect")]
    pub part_time_effect: f64,
    /// Strength of the gender difference in course-type mix and STEM majors.
    #[serde(default)]
    pub gender_encoding: f64,
    #[serde(default)]
    pub missing: MissingRates,
    pub first_cohort: i32,
    pub last_cohort: i32,
    /// Share of students in the last cohort.
    pub test_share: f64,
    /// Allowed spread between the overall rates implied by each attribute's group rates.
    #[serde(default = "default_rate_tolerance")]
    pub rate_tolerance: f64,
}

fn default_correlation() -> f64 {
    0.2
}

fn default_part_time_effect() -> f64 {
    0.3
}

fn default_rate_tolerance() -> f64 {
    0.02
}

fn pair(group: f64, reference: f64) -> RatePair {
    RatePair { group, reference }
}

/// Online and residential profiles.
pub fn default_profiles() -> (PopulationProfile, PopulationProfile) {
    let online = PopulationProfile {
        n: 25_000,
        format: Format::Online,
        seed: 0,
        protected_shares: ProtectedValues {
            gender: 0.609,
            first_gen: 0.424,
            urm: 0.331,
            high_need: 0.619,
        },
        transfer_share: 0.852,
        part_time_share: 0.772,
        mean_age: 27.1,
        overall_dropout: 0.407,
        group_dropout: ProtectedValues {
            gender: pair(0.407, 0.495),
            first_gen: pair(0.437, 0.441),
            urm: pair(0.466, 0.424),
            high_need: pair(0.458, 0.405),
        },
        feature_effect: 2.0,
        protected_effect: ProtectedValues {
            gender: 0.25,
            first_gen: -0.05,
            urm: 0.0,
            high_need: -0.25,
        },
        protected_correlation: default_correlation(),
        part_time_effect: default_part_time_effect(),
        gender_encoding: 0.65,
        missing: MissingRates::default(),
        first_cohort: 2014,
        last_cohort: 2018,
        test_share: 6939.0 / 24198.0,
        rate_tolerance: default_rate_tolerance(),
    };
    let residential = PopulationProfile {
        n: 25_000,
        format: Format::Residential,
        seed: 0,
        protected_shares: ProtectedValues {
            gender: 0.479,
            first_gen: 0.336,
            urm: 0.346,
            high_need: 0.513,
        },
        transfer_share: 0.318,
        part_time_share: 0.129,
        mean_age: 19.7,
        overall_dropout: 0.169,
        group_dropout: ProtectedValues {
            gender: pair(0.140, 0.156),
            first_gen: pair(0.179, 0.135),
            urm: pair(0.168, 0.137),
            high_need: pair(0.170, 0.128),
        },
        feature_effect: 2.0,
        protected_effect: ProtectedValues {
            gender: 0.1,
            first_gen: -0.2,
            urm: 0.0,
            high_need: -0.1,
        },
        protected_correlation: default_correlation(),
        part_time_effect: default_part_time_effect(),
        gender_encoding: 0.65,
        missing: MissingRates::default(),
        first_cohort: 2012,
        last_cohort: 2018,
        test_share: 14275.0 / 93457.0,
        rate_tolerance: default_rate_tolerance(),
    };
    (online, residential)
}

/// Default profile of one format.
pub fn default_profile(format: Format) -> PopulationProfile {
    let (online, residential) = default_profiles();
    match format {
        Format::Online => online,
        Format::Residential => residential,
    }
}

impl PopulationProfile {
    /// Overall dropout rate implied by each attribute's group rates and share.
    pub fn implied_overall_rates(&self) -> [f64; 4] {
        ProtectedAttribute::ALL.map(|a| {
            let s = self.protected_shares.get(a);
            let r = self.group_dropout.get(a);
            s * r.group + (1.0 - s) * r.reference
        })
    }

    /// Mean of [`Self::implied_overall_rates`].
    pub fn implied_overall_dropout(&self) -> f64 {
        self.implied_overall_rates().iter().sum::<f64>() / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let mut rates = vec![
            self.transfer_share,
            self.part_time_share,
            self.overall_dropout,
            self.test_share,
        ];
        for a in ProtectedAttribute::ALL {
            rates.push(self.protected_shares.get(a));
            rates.push(self.group_dropout.get(a).group);
            rates.push(self.group_dropout.get(a).reference);
        }
        if rates.iter().any(|&v| !unit(v)) {
            return Err(Error::InfeasibleProfile("shares and rates must lie in [0, 1]".into()));
        }
        for a in ProtectedAttribute::ALL {
            let r = self.group_dropout.get(a);
            if r.group <= 0.0 || r.group >= 1.0 || r.reference <= 0.0 || r.reference >= 1.0 {
                return Err(Error::InfeasibleProfile(format!("{a} dropout rates must lie strictly inside (0, 1)")));
            }
        }
        let implied = self.implied_overall_rates();
        let lo = implied.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = implied.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > self.rate_tolerance {
            return Err(Error::InfeasibleProfile(format!(
                "group dropout rates imply overall rates from {lo:.4} to {hi:.4}, spread above {}",
                self.rate_tolerance
            )));
        }
        if !(-0.99..1.0).contains(&self.protected_correlation) {
            return Err(Error::InfeasibleProfile("protected correlation must lie in (-1, 1)".into()));
        }
        if !(self.feature_effect >= 0.0 && self.mean_age > 17.0) {
            return Err(Error::InfeasibleProfile("feature_effect must be non-negative and mean_age above 17".into()));
        }
        if self.last_cohort < self.first_cohort {
            return Err(Error::InfeasibleProfile("last_cohort precedes first_cohort".into()));
        }
        let m = &self.missing;
        if [m.hs_gpa, m.test_scores, m.grades, m.major].iter().any(|&v| !unit(v)) {
            return Err(Error::InfeasibleProfile("missing rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Generated tables plus the latent quantities behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCohort {
    pub students: Vec<StudentRecord>,
    pub courses: Vec<CourseRecord>,
    /// Feature-visible latent risk of each student (log-odds scale).
    pub latent_risk: Vec<f64>,
    /// Intercept and total group log-odds fitted to the rate targets.
    pub intercept: f64,
    pub group_log_odds: [f64; 4],
}

const MAJORS: [(&str, bool); 14] = [
    ("biology", true),
    ("chemistry", true),
    ("computer_science", true),
    ("engineering", true),
    ("mathematics", true),
    ("physics", true),
    ("business", false),
    ("communication", false),
    ("criminology", false),
    ("education", false),
    ("history", false),
    ("nursing", false),
    ("psychology", false),
    ("sociology", false),
];

const MINORS: [&str; 8] = [
    "art",
    "economics",
    "english",
    "film",
    "music",
    "philosophy",
    "spanish",
    "statistics",
];

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn draw_protected(p: &PopulationProfile, rng: &mut ChaCha8Rng, normal: &Normal<f64>) -> [bool; 4] {
    let std = StdNormal::new(0.0, 1.0).expect("standard normal");
    let rho = p.protected_correlation;
    let common = normal.sample(rng);
    let shares = p.protected_shares.to_array();
    let mut out = [false; 4];
    for j in 0..4 {
        let e = normal.sample(rng);
        let z = if rho >= 0.0 {
            rho.sqrt() * common + (1.0 - rho).sqrt() * e
        } else {
            e
        };
        let cut = std.inverse_cdf(shares[j].clamp(1e-12, 1.0 - 1e-12));
        out[j] = shares[j] >= 1.0 || (shares[j] > 0.0 && z < cut);
    }
    out
}

/// Solves intercept and group log-odds so the mean predicted dropout of each
/// group matches its target on this sample.
fn calibrate_log_odds(groups: &[[bool; 4]], offset: &[f64], p: &PopulationProfile) -> (f64, [f64; 4]) {
    let targets: Vec<(usize, bool, f64)> = ProtectedAttribute::ALL
        .iter()
        .flat_map(|&a| {
            let r = p.group_dropout.get(a);
            [(a.index(), true, r.group), (a.index(), false, r.reference)]
        })
        .filter(|&(j, flag, _)| groups.iter().any(|g| g[j] == flag))
        .collect();
    let base = p.implied_overall_dropout().clamp(1e-6, 1.0 - 1e-6);
    let mut theta = [(base / (1.0 - base)).ln(), 0.0, 0.0, 0.0, 0.0];
    for _ in 0..50 {
        let mut sums = vec![(0.0f64, [0.0f64; 5], 0usize); targets.len()];
        for (g, &o) in groups.iter().zip(offset) {
            let z = theta[0] + (0..4).map(|j| if g[j] { theta[j + 1] } else { 0.0 }).sum::<f64>() + o;
            let pi = sigmoid(z);
            let d = pi * (1.0 - pi);
            for (t, &(j, flag, _)) in targets.iter().enumerate() {
                if g[j] == flag {
                    let s = &mut sums[t];
                    s.0 += pi;
                    s.1[0] += d;
                    for k in 0..4 {
                        if g[k] {
                            s.1[k + 1] += d;
                        }
                    }
                    s.2 += 1;
                }
            }
        }
        let mut jtj = [[0.0f64; 5]; 5];
        let mut jtr = [0.0f64; 5];
        let mut max_resid = 0.0f64;
        for (t, &(_, _, target)) in targets.iter().enumerate() {
            let n = sums[t].2 as f64;
            let resid = sums[t].0 / n - target;
            max_resid = max_resid.max(resid.abs());
            let row: Vec<f64> = sums[t].1.iter().map(|v| v / n).collect();
            for a in 0..5 {
                jtr[a] += row[a] * resid;
                for b in 0..5 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        if max_resid < 1e-10 {
            break;
        }
        for (a, row) in jtj.iter_mut().enumerate() {
            row[a] += 1e-9;
        }
        let step = solve5(jtj, jtr);
        for a in 0..5 {
            theta[a] -= step[a];
        }
    }
    (theta[0], [theta[1], theta[2], theta[3], theta[4]])
}

fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> [f64; 5] {
    for c in 0..5 {
        let piv = (c..5).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        a.swap(c, piv);
        b.swap(c, piv);
        if a[c][c].abs() < 1e-300 {
            continue;
        }
        for r in c + 1..5 {
            let f = a[r][c] / a[c][c];
            for k in c..5 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 5];
    for c in (0..5).rev() {
        if a[c][c].abs() < 1e-300 {
            continue;
        }
        let s: f64 = (c + 1..5).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    x
}

fn course_type_mix(female: bool, encoding: f64) -> [f64; 4] {
    let base = [0.55, 0.2, 0.15, 0.1];
    let shift = [-0.05, 0.12, -0.09, 0.02];
    let sign = if female { 1.0 } else { -1.0 };
    let mut w: Vec<f64> = base
        .iter()
        .zip(shift)
        .map(|(b, s)| (b + sign * encoding * s).max(0.005))
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    [w[0], w[1], w[2], w[3]]
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let mut u = rng.gen::<f64>() * weights.iter().sum::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn student_cohort(p: &PopulationProfile, i: usize, n_test: usize) -> i32 {
    let n_train = p.n - n_test;
    if i >= n_train || p.first_cohort == p.last_cohort {
        p.last_cohort
    } else {
        let prior = (p.last_cohort - p.first_cohort) as usize;
        p.first_cohort + (i * prior / n_train.max(1)) as i32
    }
}

/// Draws students and courses for `profile`.
pub fn generate(profile: &PopulationProfile) -> Result<SynthCohort> {
    profile.validate()?;
    let p = profile;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rng = sub_stream(p.seed, "synth-population");
    let n = p.n;

    let mut groups = Vec::with_capacity(n);
    let mut part_time = Vec::with_capacity(n);
    let mut transfer = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    for _ in 0..n {
        groups.push(draw_protected(p, &mut rng, &normal));
        part_time.push(rng.gen_bool(p.part_time_share));
        transfer.push(rng.gen_bool(p.transfer_share));
        noise.push(p.feature_effect * normal.sample(&mut rng));
    }
    let offset: Vec<f64> = (0..n)
        .map(|i| noise[i] + p.part_time_effect * (f64::from(u8::from(part_time[i])) - p.part_time_share))
        .collect();
    let (intercept, group_log_odds) = calibrate_log_odds(&groups, &offset, p);
    let gamma = p.protected_effect.to_array();
    let shift: Vec<f64> = (0..4).map(|j| group_log_odds[j] - gamma[j]).collect();

    let latent_risk: Vec<f64> = (0..n)
        .map(|i| noise[i] + (0..4).map(|j| if groups[i][j] { shift[j] } else { 0.0 }).sum::<f64>())
        .collect();
    let risk_sd = {
        let m = latent_risk.iter().sum::<f64>() / n.max(1) as f64;
        let v = latent_risk.iter().map(|r| (r - m).powi(2)).sum::<f64>() / n.max(1) as f64;
        if v > 0.0 {
            v.sqrt()
        } else {
            1.0
        }
    };

    let grade_cfg = FeatureConfig::default();
    let age_shape = 3.0;
    let age_gamma = Gamma::new(age_shape, 1.0 / age_shape).expect("gamma");
    let credit_gamma = Gamma::new(2.0, 20.0).expect("gamma");
    let n_test = ((n as f64) * p.test_share).round() as usize;
    let prefix = match p.format {
        Format::Online => "ON",
        Format::Residential => "RS",
    };

    let mut outcome_rng = sub_stream(p.seed, "synth-outcome");
    let mut rng = sub_stream(p.seed, "synth-features");
    let mut students = Vec::with_capacity(n);
    let mut courses = Vec::new();
    for i in 0..n {
        let g = groups[i];
        let z = latent_risk[i] / risk_sd;
        let female = g[0];
        let logit = intercept
            + (0..4).map(|j| if g[j] { group_log_odds[j] } else { 0.0 }).sum::<f64>()
            + offset[i];
        let dropout = outcome_rng.gen_bool(sigmoid(logit));

        let mut noisy = |w: f64| w * z + (1.0 - w * w).sqrt() * normal.sample(&mut rng);
        let hs = noisy(0.5);
        let sat_m = noisy(0.4);
        let sat_v = noisy(0.4);
        let tgpa = noisy(0.4);
        let age = 17.0 + (p.mean_age - 17.0) * age_gamma.sample(&mut rng);
        let hs_gpa = (!rng.gen_bool(p.missing.hs_gpa)).then(|| round_to((3.25 - 0.4 * hs).clamp(1.0, 4.0), 0.01));
        let has_sat = !rng.gen_bool(p.missing.test_scores);
        let sat_math = has_sat.then(|| round_to((530.0 - 80.0 * sat_m).clamp(200.0, 800.0), 10.0));
        let sat_verbal = has_sat.then(|| round_to((540.0 - 75.0 * sat_v).clamp(200.0, 800.0), 10.0));
        let is_transfer = transfer[i];
        let transfer_credits = is_transfer.then(|| round_to(credit_gamma.sample(&mut rng), 1.0));
        let transfer_gpa = is_transfer.then(|| round_to((3.0 - 0.35 * tgpa).clamp(0.0, 4.0), 0.01));

        let stem_prob = (0.35 + if female { -0.12 } else { 0.12 } * p.gender_encoding).clamp(0.02, 0.98);
        let (major, stem_major) = if rng.gen_bool(p.missing.major) {
            (None, false)
        } else {
            let stem = rng.gen_bool(stem_prob);
            let pool: Vec<&(&str, bool)> = MAJORS.iter().filter(|m| m.1 == stem).collect();
            let weights: Vec<f64> = (0..pool.len()).map(|k| 1.0 / (k as f64 + 1.5)).collect();
            let m = pool[pick(&mut rng, &weights)];
            (Some(m.0.to_string()), m.1)
        };
        let minor = rng.gen_bool(0.25).then(|| MINORS.choose(&mut rng).unwrap().to_string());

        let student_id = format!("{prefix}{i:06}");
        let load = 5.0 - 1.6 * f64::from(u8::from(part_time[i])) - 0.6 * z + 0.8 * normal.sample(&mut rng);
        let n_courses = load.round().clamp(2.0, 8.0) as usize;
        let mix = course_type_mix(female, p.gender_encoding);
        let level_w = if is_transfer {
            [0.35, 0.3, 0.2, 0.15]
        } else {
            [0.6, 0.25, 0.1, 0.05]
        };
        for c in 0..n_courses {
            let course_type = CourseType::ALL[pick(&mut rng, &mix)];
            let course_level = CourseLevel::ALL[pick(&mut rng, &level_w)];
            let units = match course_type {
                CourseType::Lecture => {
                    if rng.gen_bool(0.5) {
                        4.0
                    } else {
                        3.0
                    }
                }
                CourseType::Seminar => 3.0,
                CourseType::Lab => 1.0,
                CourseType::Other => 2.0,
            };
            let session = 1 + pick(&mut rng, &[0.25, 0.25, 0.5]) as u8;
            let required_for_major = rng.gen_bool(0.6);
            let withdraw = rng.gen_bool(sigmoid(-3.4 + 1.1 * z));
            let perf = 0.75 * z + 0.66 * normal.sample(&mut rng);
            let type_offset = match course_type {
                CourseType::Lab => 0.15,
                CourseType::Seminar => 0.1,
                _ => 0.0,
            };
            let missing_grade = rng.gen_bool(p.missing.grades);
            let (letter_grade, grade_points) = if missing_grade {
                (None, None)
            } else if withdraw {
                (Some(LetterGrade::W), None)
            } else {
                let points = (3.0 + type_offset - 0.9 * perf).clamp(0.0, 4.33);
                let letter = grade_cfg.nearest_letter(points).unwrap_or(LetterGrade::C);
                (Some(letter), grade_cfg.points(letter))
            };
            courses.push(CourseRecord {
                student_id: student_id.clone(),
                course_id: format!(
                    "{}{}-{c}",
                    &course_type.as_str()[..3].to_ascii_uppercase(),
                    course_level.number() + rng.gen_range(0..50)
                ),
                letter_grade,
                grade_points,
                units,
                required_for_major,
                course_type,
                course_level,
                session,
            });
        }

        students.push(StudentRecord {
            student_id,
            cohort: student_cohort(p, i, n_test),
            format: p.format,
            female,
            first_gen: g[1],
            urm: g[2],
            high_need: g[3],
            age: round_to(age, 0.1),
            hs_gpa,
            sat_math,
            sat_verbal,
            transfer: is_transfer,
            transfer_credits,
            transfer_gpa,
            part_time: part_time[i],
            major,
            minor,
            stem_major,
            dropout,
        });
    }
    Ok(SynthCohort {
        students,
        courses,
        latent_risk,
        intercept,
        group_log_odds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalCheck {
    pub quantity: String,
    pub target: f64,
    pub empirical: Option<f64>,
    /// Empirical minus target, in percentage points (percent of target for `mean_age`).
    pub deviation_pp: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub format: Format,
    pub n: usize,
    pub tolerance_pp: f64,
    pub checks: Vec<MarginalCheck>,
    pub notes: Vec<String>,
}

impl MarginalReport {
    pub fn check(&self, quantity: &str) -> Option<&MarginalCheck> {
        self.checks.iter().find(|c| c.quantity == quantity)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn share_where<F: Fn(&StudentRecord) -> bool>(students: &[StudentRecord], f: F) -> Option<f64> {
    (!students.is_empty()).then(|| students.iter().filter(|s| f(s)).count() as f64 / students.len() as f64)
}

/// Compares generated students with the profile targets.
///
/// `dropout` is checked against the profile's overall rate and
/// `dropout_implied` against the rate implied by the group targets; when the
/// two targets disagree a note records the gap.
pub fn validate_marginals(students: &[StudentRecord], profile: &PopulationProfile, tol_pp: f64) -> MarginalReport {
    let mut checks = Vec::new();
    let mut push = |name: String, target: f64, empirical: Option<f64>, scale: f64| {
        let deviation_pp = empirical.map(|e| (e - target) * scale);
        let pass = deviation_pp.is_some_and(|d| d.abs() <= tol_pp);
        checks.push(MarginalCheck {
            quantity: name,
            target,
            empirical,
            deviation_pp,
            pass,
        });
    };
    for a in ProtectedAttribute::ALL {
        push(
            format!("share_{}", a.column()),
            profile.protected_shares.get(a),
            share_where(students, |s| s.protected(a)),
            100.0,
        );
    }
    push("share_transfer".into(), profile.transfer_share, share_where(students, |s| s.transfer), 100.0);
    push("share_part_time".into(), profile.part_time_share, share_where(students, |s| s.part_time), 100.0);
    let mean_age = (!students.is_empty()).then(|| students.iter().map(|s| s.age).sum::<f64>() / students.len() as f64);
    push("mean_age".into(), profile.mean_age, mean_age, 100.0 / profile.mean_age);
    let dropout = share_where(students, |s| s.dropout);
    push("dropout".into(), profile.overall_dropout, dropout, 100.0);
    let implied = profile.implied_overall_dropout();
    push("dropout_implied".into(), implied, dropout, 100.0);
    for a in ProtectedAttribute::ALL {
        let (gname, rname) = a.group_names();
        let r = profile.group_dropout.get(a);
        for (name, flag, target) in [(gname, true, r.group), (rname, false, r.reference)] {
            let members: Vec<&StudentRecord> = students.iter().filter(|s| s.protected(a) == flag).collect();
            let rate = (!members.is_empty())
                .then(|| members.iter().filter(|s| s.dropout).count() as f64 / members.len() as f64);
            push(format!("dropout_{}_{}", a.column(), slug(name)), target, rate, 100.0);
        }
    }
    let mut notes = Vec::new();
    if ((implied - profile.overall_dropout) * 100.0).abs() > tol_pp {
        notes.push(format!(
            "group dropout targets imply an overall rate of {:.4}, which differs from the overall target {:.4} by {:+.2}pp; group rates take precedence",
            implied,
            profile.overall_dropout,
            (implied - profile.overall_dropout) * 100.0
        ));
    }
    if students.is_empty() {
        notes.push("no students: every marginal is undefined".into());
    }
    MarginalReport {
        format: profile.format,
        n: students.len(),
        tolerance_pp: tol_pp,
        checks,
        notes,
    }
}

fn slug(name: &str) -> String {
    name.to_ascii_lowercase().replace([' ', '-'], "_")
}
