//! Binary model file shared by both classifiers.
//!
//! Layout: `RPCM`, u16 version, u8 kind (0 ridge, 1 forest), then the
//! model body. Floats are stored as raw f64 bits so reloading is exact.

use std::path::Path;

use super::forest::{Node, Tree};
use super::{predict_forest, predict_ridge, ForestConfig, ForestModel, RidgeModel};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const MAGIC: &[u8; 4] = b"RPCM";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Ridge(RidgeModel),
    Forest(ForestModel),
}

fn opt_usize(w: &mut Writer, v: Option<usize>) -> Result<()> {
    match v {
        Some(v) => {
            w.u8(1);
            w.len_u32(v)
        }
        None => {
            w.u8(0);
            Ok(())
        }
    }
}

fn read_opt_usize(r: &mut Reader) -> Result<Option<usize>> {
    match r.u8()? {
        0 => Ok(None),
        1 => Ok(Some(r.len_u32()?)),
        f => Err(Error::Format(format!("bad option flag {f}"))),
    }
}

fn f64s(w: &mut Writer, v: &[f64]) -> Result<()> {
    w.len_u32(v.len())?;
    v.iter().for_each(|&x| w.f64(x));
    Ok(())
}

fn read_f64s(r: &mut Reader) -> Result<Vec<f64>> {
    let n = r.len_u32()?;
    (0..n).map(|_| r.f64()).collect()
}

impl Classifier {
    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Ridge(m) => m.n_features(),
            Classifier::Forest(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        match self {
            Classifier::Ridge(m) => predict_ridge(m, x),
            Classifier::Forest(m) => predict_forest(m, x),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        match self {
            Classifier::Ridge(m) => {
                w.u8(0);
                w.f64(m.lambda());
                w.f64(m.intercept());
                f64s(&mut w, m.weights())?;
                f64s(&mut w, m.feature_means())?;
                f64s(&mut w, m.feature_scales())?;
                w.len_u32(m.loo_errors().len())?;
                for &(l, e) in m.loo_errors() {
                    w.f64(l);
                    w.f64(e);
                }
            }
            Classifier::Forest(m) => {
                w.u8(1);
                let c = m.config();
                w.len_u32(c.n_trees)?;
                opt_usize(&mut w, c.max_depth)?;
                w.len_u32(c.min_leaf)?;
                opt_usize(&mut w, c.mtry)?;
                w.u64(m.seed());
                w.len_u32(m.n_features())?;
                w.len_u32(m.n_trees())?;
                for t in m.trees() {
                    let [a, b] = t.class_counts();
                    w.len_u32(a)?;
                    w.len_u32(b)?;
                    f64s(&mut w, t.importance())?;
                    w.len_u32(t.nodes().len())?;
                    for node in t.nodes() {
                        match node {
                            Node::Leaf { votes } => {
                                w.u8(0);
                                w.f64(votes[0]);
                                w.f64(votes[1]);
                            }
                            Node::Split { feature, threshold, left, right } => {
                                w.u8(1);
                                w.len_u32(*feature)?;
                                w.f64(*threshold);
                                w.len_u32(*left)?;
                                w.len_u32(*right)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(w.finish())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported classifier version {version}")));
        }
        let model = match r.u8()? {
            0 => {
                let lambda = r.f64()?;
                let intercept = r.f64()?;
                let weights = read_f64s(&mut r)?;
                let means = read_f64s(&mut r)?;
                let scales = read_f64s(&mut r)?;
                let n_loo = r.len_u32()?;
                let loo = (0..n_loo).map(|_| Ok((r.f64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
                Classifier::Ridge(RidgeModel::from_parts(weights, intercept, lambda, means, scales)?.with_loo_errors(loo))
            }
            1 => {
                let config = ForestConfig {
                    n_trees: r.len_u32()?,
                    max_depth: read_opt_usize(&mut r)?,
                    min_leaf: r.len_u32()?,
                    mtry: read_opt_usize(&mut r)?,
                };
                let seed = r.u64()?;
                let n_features = r.len_u32()?;
                let n_trees = r.len_u32()?;
                let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
                for _ in 0..n_trees {
                    let counts = [r.len_u32()?, r.len_u32()?];
                    let importance = read_f64s(&mut r)?;
                    if importance.len() != n_features {
                        return Err(Error::Format("tree importance length mismatch".into()));
                    }
                    let n_nodes = r.len_u32()?;
                    let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
                    for _ in 0..n_nodes {
                        nodes.push(match r.u8()? {
                            0 => Node::Leaf { votes: [r.f64()?, r.f64()?] },
                            1 => Node::Split {
                                feature: r.len_u32()?,
                                threshold: r.f64()?,
                                left: r.len_u32()?,
                                right: r.len_u32()?,
                            },
                            t => return Err(Error::Format(format!("bad node tag {t}"))),
                        });
                    }
                    trees.push(Tree::from_parts(nodes, importance, counts)?);
                }
                if trees.is_empty() {
                    return Err(Error::Format("forest has no trees".into()));
                }
                Classifier::Forest(ForestModel::from_trees(trees, n_features, config, seed))
            }
            k => return Err(Error::Format(format!("unknown classifier kind {k}"))),
        };
        r.finish()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}
