//! Convex multi-phase color image segmentation.
//!
//! The K-label Potts problem is lifted to a per-pixel assignment field z over
//! a fixed color palette, relaxed to the probability simplex, regularized by
//! a combined total-variation + squared-gradient term, and solved with a
//! Chambolle-Pock primal-dual iteration:
//!
//! ```text
//! min_z  lambda*||grad z||_1 + (mu/2)*||grad z||_2^2 + <z, w>
//! s.t.   z_n on the probability simplex for every pixel n
//! ```
//!
//! with costs w_{k,n} = 1/2 ||f_n - c_k||^2 against palette colors c_k. The
//! palette comes from the user, from K-means, or fully automatically from
//! histogram peak counting followed by K-means.
//!
//! ```
//! use convseg::pipeline::{make_phantom, segment, segmentation_accuracy};
//! use convseg::pipeline::{PhantomKind, SegmentOptions};
//!
//! let (img, truth, _) = make_phantom(PhantomKind::ThreePhase, 32).unwrap();
//! let (seg, report) = segment(&img, &SegmentOptions::default()).unwrap();
//! assert!(report.converged);
//! let sa = segmentation_accuracy(&seg.labels, &truth).unwrap();
//! assert_eq!(sa.value, 1.0);
//! ```

pub mod cli;
pub mod clustering;
pub mod error;
pub mod fields;
pub mod image;
pub mod io;
pub mod operators;
pub mod pipeline;
pub mod simplex;
pub mod solver;

pub use error::{Error, Result};
pub use fields::{AssignmentField, CostField, VectorField};
pub use image::{Image, Palette};
