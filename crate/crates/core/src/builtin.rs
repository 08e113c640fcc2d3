//! Codes bundled with the crate.
//!
//! * `hgp-1600-64`: hypergraph product of a (3,4)-regular 24x32 seed with itself.
//! * `hgp-2025-81`: hypergraph product of a (3,4)-regular 27x36 seed with itself.
//! * `b1-882-24`: quasi-cyclic lifted-product code with lift 63.
//!
//! The HGP seeds are random girth-6 full-rank matrices generated once with a
//! fixed seed and stored as alist files.

use crate::code::{hgp, lifted_product, CodeError, CssCode};
use crate::io::{parse_alist, parse_lifted, FormatError};

const HGP_1600: &str = include_str!("../data/hgp1600.alist");
const HGP_2025: &str = include_str!("../data/hgp2025.alist");
const B1: &str = include_str!("../data/b1.lifted");

pub const BUILTIN_CODES: [&str; 3] = ["hgp-1600-64", "hgp-2025-81", "b1-882-24"];

/// Builds a bundled code by id, or `None` for an unknown id.
pub fn builtin_code(id: &str) -> Option<Result<CssCode, FormatError>> {
    let build = |r: Result<CssCode, CodeError>| r.map(|c| c.with_name(id)).map_err(FormatError::from);
    Some(match id {
        "hgp-1600-64" => parse_alist(HGP_1600).and_then(|h| build(hgp(&h, &h))),
        "hgp-2025-81" => parse_alist(HGP_2025).and_then(|h| build(hgp(&h, &h))),
        "b1-882-24" => parse_lifted(B1).and_then(|(a, b)| build(lifted_product(&a, &b))),
        _ => return None,
    })
}
