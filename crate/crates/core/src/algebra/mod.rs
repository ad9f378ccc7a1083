//! Semirings and the bag/list monad machinery behind the two aggregators
//! of an integral transform: `⊕` reduces bags of messages, `⊗` folds
//! ordered lists of arguments.

mod bag;
mod laws;
mod monad;
mod semiring;

pub use bag::{
    distribute, fold_list, join_bag, join_list, map_bag, map_list, reduce_bag, unit_bag, unit_list,
    Bag, BagKey, OrderedList,
};
pub use laws::{check_laws, random_triples, Law, LawReport, LawResult, SampleValue};
pub use monad::{check_monad_laws, random_nested_lists, MonadLaw, MonadLawResult, MonadReport};
pub use semiring::{
    real_approx_eq, Boolean, MaxPlus, MinPlus, MinPlusReal, ParseTropicalError, Real, Semiring,
    SubtractionPlus, Tropical, ValueKind, REAL_ABS_TOL, REAL_REL_TOL,
};
