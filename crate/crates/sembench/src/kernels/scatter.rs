//! Gather-scatter accumulation: fold per-element contributions into the
//! global residual arrays.
//!
//! Deterministic mode adds elements in ascending id order on one
//! worker, which fixes the floating-point summation order regardless of
//! worker count or partitioning and serves as the bitwise reference.
//! Atomic mode parallelizes over elements with compare-and-swap adds;
//! it computes the same sums up to reassociation of at most the number
//! of elements sharing a node.

use super::context::KernelContext;
use super::{ContribBuffer, EquationMask, ExecutionPlan, ResidualSet, ScatterMode};
use crate::precision::{AtomicCell, Scalar};
use rayon::prelude::*;

/// Accumulate `contrib` into `out` for the masked components.
pub fn scatter_accumulate<S: Scalar>(
    ctx: &KernelContext<S>,
    contrib: &ContribBuffer<S>,
    mode: ScatterMode,
    mask: EquationMask,
    plan: &ExecutionPlan,
    out: &mut ResidualSet<S>,
) {
    assert_eq!(contrib.num_elements(), ctx.num_elements());
    assert_eq!(out.num_nodes(), ctx.num_nodes());
    let nloc = ctx.nodes_per_element();
    let flags = mask.flags();
    match mode {
        ScatterMode::Deterministic => {
            for e in 0..ctx.num_elements() {
                let nodes = ctx.element_nodes(e);
                let block = contrib.element(e);
                for (c, &on) in flags.iter().enumerate() {
                    if !on {
                        continue;
                    }
                    let comp = out.component_mut(c);
                    for (a, &g) in nodes.iter().enumerate() {
                        comp[g as usize] += block[c * nloc + a];
                    }
                }
            }
        }
        ScatterMode::Atomic => {
            // Atomic views of the five component arrays; adds from
            // different workers interleave freely.
            let views: [&[<S as Scalar>::Atomic]; 5] = {
                let [m0, m1, m2] = &mut out.mom;
                [
                    S::as_atomic(&mut out.mass),
                    S::as_atomic(m0),
                    S::as_atomic(m1),
                    S::as_atomic(m2),
                    S::as_atomic(&mut out.energy),
                ]
            };
            let per = plan.chunk_elements.max(1);
            let work = |e: usize| {
                let nodes = ctx.element_nodes(e);
                let block = contrib.element(e);
                for (c, &on) in flags.iter().enumerate() {
                    if !on {
                        continue;
                    }
                    for (a, &g) in nodes.iter().enumerate() {
                        views[c][g as usize].fetch_add_value(block[c * nloc + a]);
                    }
                }
            };
            if plan.workers <= 1 {
                (0..ctx.num_elements()).for_each(work);
            } else {
                (0..ctx.num_elements())
                    .into_par_iter()
                    .with_min_len(per)
                    .for_each(work);
            }
        }
    }
}
