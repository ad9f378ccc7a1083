use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{MaxPlus, MinPlusReal, Real, Semiring};

use super::{GnnError, Mlp};

/// The permutation-invariant `⊕` used to combine messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Max,
    Sum,
    Min,
}

impl Aggregator {
    /// `⊗` of the semiring whose `⊕` this aggregator is.
    pub fn times(self, a: f64, b: f64) -> f64 {
        match self {
            Aggregator::Sum => Real.times(&a, &b),
            Aggregator::Max => MaxPlus.times(&a, &b),
            Aggregator::Min => MinPlusReal.times(&a, &b),
        }
    }

    pub fn plus(self, a: f64, b: f64) -> f64 {
        match self {
            Aggregator::Sum => Real.plus(&a, &b),
            Aggregator::Max => MaxPlus.plus(&a, &b),
            Aggregator::Min => MinPlusReal.plus(&a, &b),
        }
    }

    pub fn zero(self) -> f64 {
        match self {
            Aggregator::Sum => Real.zero(),
            Aggregator::Max => MaxPlus.zero(),
            Aggregator::Min => MinPlusReal.zero(),
        }
    }

    /// Whether an empty preimage is replaced by the configured floor.
    pub(crate) fn uses_floor(self) -> bool {
        self != Aggregator::Sum
    }
}

/// Shape and seed of one message-passing layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConfig {
    pub aggregator: Aggregator,
    pub node_width: usize,
    pub edge_width: usize,
    pub graph_width: usize,
    pub message_width: usize,
    pub output_width: usize,
    /// Width of the single hidden layer of every MLP.
    pub hidden_width: usize,
    /// Value of a max/min aggregate over no messages.
    pub floor: f64,
    pub seed: u64,
    /// Largest number of intermediate values a triple-indexed layer may hold.
    pub memory_cap: usize,
}

pub const DEFAULT_MEMORY_CAP: usize = 1 << 26;

impl LayerConfig {
    pub fn new(
        aggregator: Aggregator,
        node_width: usize,
        edge_width: usize,
        graph_width: usize,
        seed: u64,
    ) -> Self {
        LayerConfig {
            aggregator,
            node_width,
            edge_width,
            graph_width,
            message_width: 8,
            output_width: 8,
            hidden_width: 16,
            floor: 0.0,
            seed,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), GnnError> {
        let widths = [
            self.node_width,
            self.edge_width,
            self.graph_width,
            self.message_width,
            self.output_width,
            self.hidden_width,
        ];
        if widths.contains(&0) {
            return Err(GnnError::ZeroWidth);
        }
        Ok(())
    }

    /// Common row width of the padded input map.
    pub(crate) fn padded_width(&self) -> usize {
        self.node_width.max(self.edge_width).max(self.graph_width)
    }

    /// Meaningful widths of the blocks a pair-indexed message sees:
    /// graph, sender, receiver, edge.
    pub(crate) fn pair_blocks(&self) -> Vec<usize> {
        vec![
            self.graph_width,
            self.node_width,
            self.node_width,
            self.edge_width,
        ]
    }

    /// Graph, three node broadcasts, three edge broadcasts.
    pub(crate) fn triple_blocks(&self) -> Vec<usize> {
        let (g, v, e) = (self.graph_width, self.node_width, self.edge_width);
        vec![g, v, v, v, e, e, e]
    }
}

/// `ψ`: turns the ordered argument blocks of one message into a row.
#[derive(Debug, Clone, PartialEq)]
pub enum MessageFn {
    /// Concatenates the blocks and applies an MLP.
    Mlp(Mlp),
    /// Channelwise `⊗`-fold of the selected blocks (all when `None`), each
    /// zero-padded to the common width.
    Fold { positions: Option<Vec<usize>> },
}

impl MessageFn {
    pub fn output_width(&self, padded: usize) -> usize {
        match self {
            MessageFn::Mlp(m) => m.output_width(),
            MessageFn::Fold { .. } => padded,
        }
    }

    /// `blocks[b]` holds the meaningful prefix of argument `b`.
    pub fn apply(&self, agg: Aggregator, blocks: &[&[f64]], padded: usize) -> Vec<f64> {
        match self {
            MessageFn::Mlp(m) => m.forward(&blocks.concat()),
            MessageFn::Fold { positions } => {
                let chosen: Vec<&[f64]> = match positions {
                    Some(ps) => ps.iter().map(|&k| blocks[k]).collect(),
                    None => blocks.to_vec(),
                };
                (0..padded)
                    .map(|c| {
                        let mut vals = chosen.iter().map(|b| b.get(c).copied().unwrap_or(0.0));
                        let first = vals.next().unwrap_or(0.0);
                        vals.fold(first, |acc, v| agg.times(acc, v))
                    })
                    .collect()
            }
        }
    }

    fn check(&self, blocks: &[usize], what: &str) -> Result<(), GnnError> {
        match self {
            MessageFn::Mlp(m) => {
                let expected: usize = blocks.iter().sum();
                if m.input_width() != expected {
                    return Err(GnnError::WidthMismatch {
                        what: format!("{what} input"),
                        expected,
                        found: m.input_width(),
                    });
                }
            }
            MessageFn::Fold {
                positions: Some(ps),
            } => {
                if let Some(&bad) = ps.iter().find(|&&k| k >= blocks.len()) {
                    return Err(GnnError::WidthMismatch {
                        what: format!("{what} fold position"),
                        expected: blocks.len(),
                        found: bad,
                    });
                }
            }
            MessageFn::Fold { positions: None } => {}
        }
        Ok(())
    }
}

/// `φ`: combines an element's own features with its aggregate.
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    /// MLP over `own ‖ aggregate`.
    Mlp(Mlp),
    /// Returns the aggregate unchanged.
    PassThrough,
}

impl Readout {
    pub fn apply(&self, own: &[f64], aggregate: &[f64]) -> Vec<f64> {
        match self {
            Readout::Mlp(m) => m.forward(&[own, aggregate].concat()),
            Readout::PassThrough => aggregate.to_vec(),
        }
    }

    fn check(&self, own: usize, message: usize, what: &str) -> Result<(), GnnError> {
        match self {
            Readout::Mlp(m) if m.input_width() != own + message => Err(GnnError::WidthMismatch {
                what: format!("{what} input"),
                expected: own + message,
                found: m.input_width(),
            }),
            _ => Ok(()),
        }
    }
}

/// `ψ` and `φ` of a pair-indexed layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MpnnParams {
    pub psi: MessageFn,
    pub phi: Readout,
}

impl MpnnParams {
    /// Draws `ψ` then `φ` from one generator seeded by `cfg.seed`.
    pub fn init(cfg: &LayerConfig) -> Result<Self, GnnError> {
        cfg.validate()?;
        Self::draw(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
    }

    fn draw(cfg: &LayerConfig, rng: &mut ChaCha8Rng) -> Result<Self, GnnError> {
        let psi_in: usize = cfg.pair_blocks().iter().sum();
        let psi = Mlp::random(&[psi_in, cfg.hidden_width, cfg.message_width], rng)?;
        let phi = Mlp::random(
            &[
                cfg.node_width + cfg.message_width,
                cfg.hidden_width,
                cfg.output_width,
            ],
            rng,
        )?;
        Ok(MpnnParams {
            psi: MessageFn::Mlp(psi),
            phi: Readout::Mlp(phi),
        })
    }

    /// Message width; errors if `ψ` or `φ` disagree with `cfg`.
    pub(crate) fn check(&self, cfg: &LayerConfig) -> Result<usize, GnnError> {
        cfg.validate()?;
        let padded = cfg.padded_width();
        self.psi.check(&cfg.pair_blocks(), "psi")?;
        let m = self.psi.output_width(padded);
        self.phi.check(cfg.node_width, m, "phi")?;
        Ok(m)
    }
}

/// Parameters of the layer with pair- and triple-indexed messages.
#[derive(Debug, Clone, PartialEq)]
pub struct V3Params {
    pub psi2: MessageFn,
    pub psi3: MessageFn,
    pub phi_node: Readout,
    pub phi_edge: Readout,
}

impl V3Params {
    /// Draws `ψ₂`, `φ_node`, `ψ₃`, `φ_edge` in that order, so the node path
    /// shares its parameters with [`MpnnParams::init`] for the same seed.
    pub fn init(cfg: &LayerConfig) -> Result<Self, GnnError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let pair = MpnnParams::draw(cfg, &mut rng)?;
        let psi3_in: usize = cfg.triple_blocks().iter().sum();
        let psi3 = Mlp::random(&[psi3_in, cfg.hidden_width, cfg.message_width], &mut rng)?;
        let phi_edge = Mlp::random(
            &[
                cfg.edge_width + cfg.message_width,
                cfg.hidden_width,
                cfg.output_width,
            ],
            &mut rng,
        )?;
        Ok(V3Params {
            psi2: pair.psi,
            psi3: MessageFn::Mlp(psi3),
            phi_node: pair.phi,
            phi_edge: Readout::Mlp(phi_edge),
        })
    }

    pub(crate) fn check(&self, cfg: &LayerConfig) -> Result<usize, GnnError> {
        cfg.validate()?;
        let padded = cfg.padded_width();
        self.psi2.check(&cfg.pair_blocks(), "psi2")?;
        self.psi3.check(&cfg.triple_blocks(), "psi3")?;
        let m = self.psi2.output_width(padded);
        let m3 = self.psi3.output_width(padded);
        if m != m3 {
            return Err(GnnError::WidthMismatch {
                what: "psi3 output".into(),
                expected: m,
                found: m3,
            });
        }
        self.phi_node.check(cfg.node_width, m, "phi_node")?;
        self.phi_edge.check(cfg.edge_width, m, "phi_edge")?;
        Ok(m)
    }
}
