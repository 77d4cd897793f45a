use std::fmt::Write as _;
use std::path::Path;

use super::cv::Classifier;
use super::knn::KnnModel;
use super::logreg::LogRegModel;
use super::{balance, ClassifierError, CvResult, Family, FeatureSubset, MatchFeatures, Sample, Standardizer};
use crate::event_graph::MatchFilter;
use crate::fingerprint::MatchEntry;

pub const MODEL_FORMAT: &str = "ugc-model";
pub const MODEL_VERSION: u32 = 1;

/// A classifier together with its feature subset and scaling, ready to
/// label raw match entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub family: Family,
    pub param: f64,
    pub subset: FeatureSubset,
    pub standardizer: Standardizer,
    pub classifier: Classifier,
    /// Cross-validation figures of the selected cell, when known.
    pub cv: Option<CvResult>,
    pub degraded: bool,
}

impl TrainedModel {
    /// Balance `data` and fit one model on all of it.
    pub fn fit(data: &[Sample], family: Family, param: f64, subset: FeatureSubset, seed: u64) -> Result<Self, ClassifierError> {
        let data = balance(data, seed)?;
        let rows: Vec<Vec<f64>> = data.iter().map(|s| subset.project(&s.features)).collect();
        let labels: Vec<u8> = data.iter().map(|s| s.class).collect();
        let standardizer = Standardizer::fit(&rows);
        let classifier = Classifier::fit(family, param, &standardizer.apply_all(&rows), &labels)?;
        Ok(TrainedModel {
            family,
            param,
            subset,
            standardizer,
            classifier,
            cv: None,
            degraded: false,
        })
    }

    /// `(class, score)` for raw match counts.
    pub fn predict(&self, f: &MatchFeatures) -> (u8, f64) {
        self.classifier.predict(&self.standardizer.apply(&self.subset.project(f)))
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("format", &MODEL_FORMAT);
        kv("version", &MODEL_VERSION);
        kv("family", &self.family);
        kv("subset", &self.subset);
        kv("features", &self.subset.names().join(","));
        kv("param", &format!("{:?}", self.param));
        kv("degraded", &self.degraded);
        kv("mean", &list(&self.standardizer.mean));
        kv("std", &list(&self.standardizer.std));
        if let Some(cv) = &self.cv {
            kv("cv.train_error", &format!("{:?}", cv.train_error));
            kv("cv.validation_error", &format!("{:?}", cv.validation_error));
            kv("cv.accuracy", &format!("{:?}", cv.accuracy));
            kv("cv.wrong_match_false_positives", &cv.wrong_match_false_positives);
            kv("cv.outer_iterations", &cv.outer_iterations);
            kv("cv.test_samples", &cv.test_samples);
        }
        match &self.classifier {
            Classifier::LogReg(m) => {
                kv("weights", &list(&m.weights));
                kv("bias", &format!("{:?}", m.bias));
            }
            Classifier::Knn(m) => {
                for (p, y) in m.points.iter().zip(&m.labels) {
                    kv("point", &format!("{},{y}", list(p)));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifierError> {
        let mut fields: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad(i + 1, "expected `key = value`"))?;
            fields.push((i + 1, k.trim(), v.trim()));
        }
        let get = |key: &str| fields.iter().find(|f| f.1 == key).map(|f| (f.0, f.2));
        let need = |key: &str| get(key).ok_or_else(|| bad(0, &format!("missing field {key:?}")));
        let num = |key: &str| -> Result<f64, ClassifierError> {
            let (line, v) = need(key)?;
            v.parse().map_err(|_| bad(line, &format!("{key} is not a number")))
        };
        let floats = |line: usize, v: &str| -> Result<Vec<f64>, ClassifierError> {
            v.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad(line, "bad number list")))
                .collect()
        };

        let (line, format) = need("format")?;
        if format != MODEL_FORMAT {
            return Err(bad(line, "not a model file"));
        }
        let (line, version) = need("version")?;
        let version: u32 = version.parse().map_err(|_| bad(line, "version is not an integer"))?;
        if version != MODEL_VERSION {
            return Err(ClassifierError::UnsupportedVersion(version));
        }
        let family: Family = need("family")?.1.parse()?;
        let subset: FeatureSubset = need("subset")?.1.parse()?;
        let param = num("param")?;
        let degraded = need("degraded")?.1 == "true";
        let (ml, mean) = need("mean")?;
        let (sl, std) = need("std")?;
        let standardizer = Standardizer {
            mean: floats(ml, mean)?,
            std: floats(sl, std)?,
        };
        let dim = subset.dim();
        if standardizer.mean.len() != dim || standardizer.std.len() != dim {
            return Err(bad(ml, "standardizer width does not match the subset"));
        }
        let cv = match get("cv.validation_error") {
            None => None,
            Some(_) => Some(CvResult {
                family,
                param,
                subset,
                train_error: num("cv.train_error")?,
                validation_error: num("cv.validation_error")?,
                accuracy: num("cv.accuracy")?,
                wrong_match_false_positives: num("cv.wrong_match_false_positives")? as usize,
                outer_iterations: num("cv.outer_iterations")? as usize,
                test_samples: num("cv.test_samples")? as usize,
            }),
        };
        let classifier = match family {
            Family::LogReg => {
                let (wl, w) = need("weights")?;
                let weights = floats(wl, w)?;
                if weights.len() != dim {
                    return Err(bad(wl, "weight count does not match the subset"));
                }
                Classifier::LogReg(LogRegModel {
                    weights,
                    bias: num("bias")?,
                    c: param,
                })
            }
            Family::Knn => {
                let mut points = Vec::new();
                let mut labels = Vec::new();
                for &(line, _, v) in fields.iter().filter(|f| f.1 == "point") {
                    let mut row = floats(line, v)?;
                    let label = row.pop().filter(|_| row.len() == dim).ok_or_else(|| bad(line, "point width"))?;
                    if label != 0.0 && label != 1.0 {
                        return Err(bad(line, "point label must be 0 or 1"));
                    }
                    points.push(row);
                    labels.push(label as u8);
                }
                if points.is_empty() {
                    return Err(ClassifierError::EmptyModel);
                }
                Classifier::Knn(KnnModel {
                    k: param as usize,
                    points,
                    labels,
                })
            }
        };
        Ok(TrainedModel {
            family,
            param,
            subset,
            standardizer,
            classifier,
            cv,
            degraded,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        std::fs::write(path, self.to_text()).map_err(|e| ClassifierError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let text = std::fs::read_to_string(path).map_err(|e| ClassifierError::io(path, e))?;
        Self::from_text(&text)
    }
}

fn bad(line: usize, reason: &str) -> ClassifierError {
    ClassifierError::ModelFormat {
        line,
        reason: reason.to_string(),
    }
}

impl MatchFilter for TrainedModel {
    fn is_true_match(&self, entry: &MatchEntry) -> bool {
        self.predict(&super::featurize(entry)).0 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::match_classifier::SampleKind;

    fn data() -> Vec<Sample> {
        (0..40)
            .map(|i| {
                let class = (i % 3 == 0) as u8;
                Sample {
                    features: MatchFeatures {
                        ml: if class == 1 { 30 + i } else { 5 + i % 4 },
                        tml: 40 + i,
                        lq: 900 + 7 * i,
                        li: 1100 - 3 * i,
                    },
                    class,
                    kind: if class == 1 { SampleKind::True } else { SampleKind::Repetition },
                    query_song_id: format!("s{}", i % 4),
                    query_id: format!("q{i}"),
                    clip_id: "c".into(),
                    offset_frames: 0,
                    vacuous: false,
                }
            })
            .collect()
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        for (family, param) in [(Family::LogReg, 8.0), (Family::Knn, 3.0)] {
            let mut m = TrainedModel::fit(&data(), family, param, FeatureSubset::S2, 4).unwrap();
            m.cv = Some(CvResult {
                family,
                param,
                subset: FeatureSubset::S2,
                train_error: 0.01,
                validation_error: 1.0 / 3.0,
                accuracy: 0.95,
                wrong_match_false_positives: 0,
                outer_iterations: 4,
                test_samples: 40,
            });
            let text = m.to_text();
            let back = TrainedModel::from_text(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn records_subset_and_predicts() {
        let m = TrainedModel::fit(&data(), Family::LogReg, 64.0, FeatureSubset::S1, 0).unwrap();
        assert!(m.to_text().contains("subset = S1\n"));
        let strong = MatchFeatures { ml: 60, tml: 70, lq: 900, li: 900 };
        let weak = MatchFeatures { ml: 5, tml: 70, lq: 900, li: 900 };
        assert_eq!(m.predict(&strong).0, 1);
        assert_eq!(m.predict(&weak).0, 0);
    }

    #[test]
    fn version_bump_is_refused() {
        let text = TrainedModel::fit(&data(), Family::Knn, 1.0, FeatureSubset::S1, 0).unwrap().to_text();
        let bumped = text.replace("version = 1", "version = 2");
        assert!(matches!(TrainedModel::from_text(&bumped), Err(ClassifierError::UnsupportedVersion(2))));
        assert!(TrainedModel::from_text("format = other\n").is_err());
        assert!(TrainedModel::from_text(&text.replace("subset = S1", "subset = S9")).is_err());
    }
}
