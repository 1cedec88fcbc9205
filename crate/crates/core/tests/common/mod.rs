use rectcomm::bounds::Tightness;

use Tightness::{NotTight as No, Tight as Yes, TightUpToPolylog as Poly};

pub type Row = ((usize, usize, usize, usize), &'static str, &'static str, u64, u64, bool, Tightness);

// (shape, disconnected, formula, base, log argument, polylog?, tightness),
// written out by hand, one entry per table row.
#[rustfmt::skip]
pub const TABLE: &[Row] = &[
    ((3, 2, 2, 10), "EncA", "thm-dec-con", 6, 10, false, Yes),
    ((3, 2, 2, 10), "DecC", "thm-enc-con", 6, 10, true, Poly),
    ((3, 2, 2, 10), "DecC", "cor-dec-discon", 3, 5, false, No),
    ((2, 3, 2, 10), "EncA", "thm-dec-con", 4, 10, false, No),
    ((2, 3, 2, 10), "EncA", "thm-enc-con", 6, 10, true, Poly),
    ((2, 3, 2, 10), "EncB", "thm-dec-con", 4, 10, false, No),
    ((2, 3, 2, 10), "EncB", "thm-enc-con", 6, 10, true, Poly),
    ((2, 2, 3, 10), "EncB", "thm-dec-con", 6, 10, false, Yes),
    ((2, 2, 3, 10), "DecC", "thm-enc-con", 6, 10, true, Poly),
    ((2, 2, 3, 10), "DecC", "cor-dec-discon", 3, 5, false, No),
    ((6, 6, 4, 100), "EncA+EncB", "thm-dec-con", 24, 100, false, No),
    ((6, 6, 4, 100), "EncA+EncB", "cor-enc-discon", 18, 50, true, No),
    ((12, 12, 12, 1000), "EncA+EncB", "thm-dec-con", 144, 1000, false, Yes),
    ((3, 2, 3, 15), "none", "thm-dec-con", 9, 15, false, Yes),
    ((3, 3, 2, 15), "none", "thm-dec-con", 6, 15, false, No),
    ((3, 3, 2, 15), "none", "thm-enc-con", 9, 15, true, Poly),
    ((2, 3, 3, 15), "none", "thm-dec-con", 6, 15, false, No),
    ((2, 3, 3, 15), "none", "thm-enc-con", 9, 15, true, Poly),
    ((9, 6, 6, 225), "none", "thm-dec-con", 54, 225, false, Yes),
    ((6, 6, 9, 225), "none", "thm-dec-con", 54, 225, false, Yes),
    ((6, 9, 6, 225), "none", "thm-dec-con", 36, 225, false, No),
    ((6, 9, 6, 225), "none", "thm-enc-con", 54, 225, true, Poly),
    ((18, 18, 18, 3375), "none", "thm-dec-con", 324, 3375, false, Yes),
];
