//! Commutative coefficient rings `Z[x_1..x_k]/(f_1(x_1),..,f_k(x_k))` (optionally mod `N`),
//! their elements in canonical form, and homomorphisms between them.

mod hom;
mod poly;
mod ring;

pub use hom::{CoeffHom, CoeffSection, HomDescriptor};
pub use poly::{cyclotomic, cyclotomic_identity, is_prime, norm_identity, reduce_mod, UPoly};
pub use ring::{mod_inverse, CoeffElem, CoeffRing, Exponents, RingPresentation};
#[allow(unused_imports)]
pub(crate) use ring::same_ring;
