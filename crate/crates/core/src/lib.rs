//! Exact computations in the Cuntz semigroup of `C₀(X \ v)` for a rooted
//! tree `X`: piecewise-linear functions and maps on trees, lower
//! semicontinuous rank functions, generator tables of Cuntz morphisms, the
//! `d_W` and `d_U` distances, and an approximate lifting algorithm from
//! tables to diagonal homomorphisms.
//!
//! Everything is generic over an exact [`Scalar`]; the aliases below pick
//! arbitrary-precision rationals.

pub mod corpus;
pub mod distance;
pub mod error;
pub mod generators;
pub mod lifting;
pub mod lsc;
pub mod metrics;
pub mod open_set;
pub mod oracle;
pub mod pl;
pub mod scalar;
pub mod suites;
pub mod tree;
pub mod tree_map;
pub mod wire;

pub use error::{Error, Result};
pub use generators::{check_relations, generator, generators, hereditary_open};
pub use lifting::{approximate_lift, cauchy_driver, discretize, interpolate_chain, realize_profile, Certificate, ElementProfile, Lift};
pub use lsc::{EdgeSteps, LscFunction, Rank};
pub use metrics::{
    cu_of_hom, d_u_commutative, d_u_upper_diagonal, d_w_interval, d_w_tree, evaluate, total_class, DiagonalHom, GeneratorTable,
    LevelFamily,
};
pub use open_set::OpenSubset;
pub use pl::PlFunction;
pub use scalar::Scalar;
pub use tree::{EdgeId, RootedTree, TreePoint, VertexId};
pub use tree_map::PlTreeMap;

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;
/// Machine rational on `i64`; fast but may overflow on deep pipelines.
pub type Rational64 = num_rational::Ratio<i64>;
/// Machine rational on `i128`.
pub type Rational128 = num_rational::Ratio<i128>;
