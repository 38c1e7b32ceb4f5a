//! The sign rulebook.
//!
//! Every Koszul sign in the engine is produced by a named rule in this
//! module, so that sign choices are made exactly once, can be audited
//! mechanically (see `opposite_sign_audit`), and are hashed into report
//! provenance. All rules return parities (exponents of −1); callers convert
//! via [`crate::scalar::Field::sign`].
//!
//! Master convention (right tail): operations are written acting on words
//! right-to-left, `μ^d(a_d, …, a_1)`. When an inner operation is applied to
//! a segment of a word, it picks up the parity `Σ ‖a_k‖` of the *reduced*
//! degrees `‖a‖ = |a| − 1` of the letters strictly to its right; letters in
//! module (non-bar) slots count with their unreduced degree. No other signs
//! appear in the structure relations.

/// Parity prefix for an inner operation passing the right tail `a_n, …, a_1`
/// of bar letters: `Σ_{k ≤ n} ‖a_k‖`.
///
/// This is the only sign in the A∞-associativity relation
/// `Σ (−1)^{✠_n} μ(a_d, …, μ(a_{n+m}, …, a_{n+1}), …, a_1) = 0`.
pub fn bar_tail_parity(sum_reduced_right: i64) -> i64 {
    sum_reduced_right
}

/// Strict unit, right slot: `μ²(a, e) = a`.
pub fn unit_right_parity(_deg_a: i64) -> i64 {
    0
}

/// Strict unit, left slot: `μ²(e, a) = (−1)^{|a|} a`.
pub fn unit_left_parity(deg_a: i64) -> i64 {
    deg_a
}

/// Classical dictionary: an associative product `·` induces
/// `μ²(a₂, a₁) = (−1)^{|a₁|} a₂·a₁` (all higher `μ` zero).
pub fn classical_product_parity(deg_a1: i64) -> i64 {
    deg_a1
}

/// Cohomology-level product: `[a₂]·[a₁] = (−1)^{|a₁|} [μ²(a₂, a₁)]`.
pub fn h_product_parity(deg_a1: i64) -> i64 {
    deg_a1
}

/// Diagonal bimodule: `μ_P^{s;1;r}(a'_s,…,a'_1; p; a_r,…,a_1)` is
/// `(−1)^{‖a_1‖+⋯+‖a_r‖+1} μ_A^{r+1+s}(a'_s,…,a'_1, p, a_r,…,a_1)`.
pub fn diagonal_parity(sum_reduced_right: i64) -> i64 {
    sum_reduced_right + 1
}

/// Shifted bimodule `P[1]`: structure maps acquire
/// `(−1)^{‖a_1‖+⋯+‖a_r‖+1}` relative to `P` (right-word reduced degrees).
pub fn shift_parity(sum_reduced_right: i64) -> i64 {
    sum_reduced_right + 1
}

/// Dual bimodule `P^∨`: `⟨μ_{P^∨}^{s;1;r}(a'; ξ; a), p⟩ =
/// (−1)^{|p|+1} ⟨ξ, μ_P^{r;1;s}(a; p; a')⟩` — the `(r, s)` roles swap.
pub fn dual_parity(deg_p: i64) -> i64 {
    deg_p + 1
}

/// Sign twist `P~`: multiplies `μ^{s;1;r}` by
/// `(−1)^{‖a_1‖+⋯+‖a_r‖+‖a'_1‖+⋯+‖a'_s‖+1}`.
pub fn twist_parity(sum_reduced_left_and_right: i64) -> i64 {
    sum_reduced_left_and_right + 1
}

/// Bimodule structure relation, left-insertion family: an algebra operation
/// consuming `a'_{i+j}, …, a'_{i+1}` on the module's left passes the whole
/// right word, the module element, and the left prefix `a'_i, …, a'_1`:
/// `(−1)^{‖a_1‖+⋯+‖a_r‖ + |p| + ‖a'_1‖+⋯+‖a'_i‖}`.
pub fn module_left_insert_parity(
    sum_reduced_right: i64,
    deg_p: i64,
    sum_reduced_left_prefix: i64,
) -> i64 {
    sum_reduced_right + deg_p + sum_reduced_left_prefix
}

/// Bimodule strict unit, right slot: `μ^{0;1;1}(p, e) = p`.
pub fn module_unit_right_parity(_deg_p: i64) -> i64 {
    0
}

/// Bimodule strict unit, left slot: `μ^{1;1;0}(e, p) = −(−1)^{|p|} p`.
pub fn module_unit_left_parity(deg_p: i64) -> i64 {
    deg_p + 1
}

/// Classical dictionary for bimodules: associative actions `·` induce
/// `μ^{0;1;1}(p, a) = p·a` and `μ^{1;1;0}(a, p) = −(−1)^{|p|} a·p`
/// (all higher μ zero). Compatible with [`classical_product_parity`] on the
/// diagonal bimodule.
pub fn classical_left_action_parity(deg_p: i64) -> i64 {
    deg_p + 1
}

/// Hom-complex differential: the `μ_target ∘ φ` family enters with
/// `(−1)^{|φ|·(‖a_1‖+⋯+‖a_i‖)}` (φ passing the right tail), the
/// `φ ∘ μ_source` families with a global `−(−1)^{|φ|}` so that degree-|φ|
/// cocycles are exactly the bimodule-map equations.
pub fn hom_diff_outer_parity(deg_phi: i64, sum_reduced_right: i64) -> i64 {
    deg_phi * sum_reduced_right
}

/// Global parity on the `φ ∘ μ` side of the hom differential: `|φ| + 1`.
pub fn hom_diff_inner_parity(deg_phi: i64) -> i64 {
    deg_phi + 1
}

/// Composition of bimodule maps: `(ψ∘φ)` sums
/// `(−1)^{|φ|·(‖a_1‖+⋯+‖a_i‖)} ψ(…; φ(…); …)`.
pub fn compose_parity(deg_phi: i64, sum_reduced_right: i64) -> i64 {
    deg_phi * sum_reduced_right
}

/// Cohomology-level map of a closed degree-d morphism:
/// `H(φ)[p] = (−1)^{d·|p|} [φ^{0;1;0}(p)]`.
pub fn h_level_parity(deg_phi: i64, deg_p: i64) -> i64 {
    deg_phi * deg_p
}

/// Cohomology-level right action on `H(P)`: `[p]·[a] = [μ^{0;1;1}(p; a)]`.
pub fn h_right_action_parity(_deg_a: i64) -> i64 {
    0
}

/// Cohomology-level left action on `H(P)`:
/// `[a]·[p] = −(−1)^{|p|} [μ^{1;1;0}(a; p)]`.
pub fn h_left_action_parity(deg_p: i64) -> i64 {
    deg_p + 1
}

/// Hochschild chain differential, wrap-around terms: a segment
/// `a_d, …, a_{d−i+1}` moving past `p ⊗ a_{d−i} ⊗ … ⊗ a_1` contributes
/// `(−1)^{(‖a_{d−i+1}‖+⋯+‖a_d‖)·(|p|+‖a_1‖+⋯+‖a_{d−i}‖)}`.
pub fn hochschild_wrap_parity(moved_reduced: i64, deg_p_plus_left_reduced: i64) -> i64 {
    moved_reduced * deg_p_plus_left_reduced
}

/// Chain-level pairing realizing `CC_*(A, Q ⊗_A P)^∨ ≅ hom(P, Q^∨)`:
/// a morphism φ corresponds to the functional
/// `a_d ⊗ … ⊗ a_1 ⊗ (q ⊗ c_t ⊗ … ⊗ c_1 ⊗ p) ↦
///  (−1)^{|q|} ⟨φ^{t;1;d}(c_t,…,c_1; p; a_d,…,a_1), q⟩`
/// (the right word of `p` wraps cyclically through the chain letters).
pub fn hom_chain_duality_parity(deg_q: i64) -> i64 {
    deg_q
}

/// Hochschild chain differential, word-internal terms: an algebra operation
/// `μ_A^j(a_{i+j}, …, a_{i+1})` inside `a_d ⊗ … ⊗ a_1 ⊗ p` contributes
/// `(−1)^{|p| + ‖a_1‖ + ⋯ + ‖a_i‖}` (the module element is first-applied).
pub fn cc_internal_parity(deg_p: i64, red_prefix: i64) -> i64 {
    deg_p + red_prefix
}

/// Cyclic rotation `CC_*(A, Q ⊗_A P) → CC_*(A, P ⊗_A Q)`: rotating the
/// block `p ⊗ a_k ⊗ … ⊗ a_1` from the right end to the left end past the
/// rest `w` costs `(−1)^{(|p|+‖a_1‖+⋯+‖a_k‖)·(‖w‖-total)}` where the
/// `‖·‖`-total of `w` includes `|q|` unreduced and reduced degrees of its
/// bar letters.
pub fn rotation_parity(moved_total: i64, remaining_total: i64) -> i64 {
    moved_total * remaining_total
}

/// Gerstenhaber circle product `η ∘ ξ`: inserting `ξ` into `η` at a slot
/// with right tail `b_n, …, b_1` costs `(−1)^{‖ξ‖́ · (‖b_1‖+⋯+‖b_n‖)}`
/// where `‖ξ‖́ = |ξ| − 1` is the shifted (Lie) degree of the cochain.
pub fn gerstenhaber_insert_parity(shifted_deg_xi: i64, sum_reduced_right: i64) -> i64 {
    shifted_deg_xi * sum_reduced_right
}

/// Gerstenhaber bracket: `[η, ξ] = η∘ξ − (−1)^{‖η‖́·‖ξ‖́} ξ∘η`.
pub fn gerstenhaber_bracket_parity(shifted_deg_eta: i64, shifted_deg_xi: i64) -> i64 {
    shifted_deg_eta * shifted_deg_xi
}

/// Tensor-product structure maps: an inner block operation (a factor
/// absorbing adjacent gap letters, or an algebra operation inside one gap)
/// costs `(−1)^{bar degree of the content strictly on its first-applied
/// side}` — factor elements unreduced, gap letters reduced.
pub fn tensor_block_parity(prefix_bar: i64) -> i64 {
    prefix_bar
}

/// Tensoring a morphism with an identity: a component of `φ ⊗ id` passing
/// content of bar degree `passed` on its first-applied side costs
/// `(−1)^{|φ|·passed}`; components of `id ⊗ φ` pass nothing.
pub fn tensor_hom_factor_parity(deg_phi: i64, passed_bar: i64) -> i64 {
    deg_phi * passed_bar
}

/// Collapse `A ⊗_A P → P`: the component folding `a ⊗ w ⊗ p` with right
/// externals `r` into `μ_P(lext, a, w; p; r)` costs
/// `(−1)^{|p| + ‖w‖ + ‖r‖ + 1}`, independent of `a` and the left word; on
/// the unit slice it returns `e ⊗ p ↦ p`.
pub fn collapse_left_parity(deg_p: i64, red_gap: i64, red_right: i64) -> i64 {
    deg_p + red_gap + red_right + 1
}

/// Collapse `P ⊗_A A → P`: the component folding `p ⊗ w ⊗ a` with right
/// externals `r` into `μ_P(lext; p; r, a, w)` costs `(−1)^{‖r‖}`; on the
/// unit slice it returns `p ⊗ e ↦ p`.
pub fn collapse_right_parity(red_right: i64) -> i64 {
    red_right
}

/// The canonical listing of every rule above, in a fixed order. Hashed into
/// report provenance so golden outputs are pinned to a sign convention.
pub fn convention_listing() -> String {
    let rules: [(&str, &str); 27] = [
        ("bar_tail", "(-1)^{sum ||a_k||, k<=n} on inner operations"),
        ("unit_right", "mu2(a, e) = a"),
        ("unit_left", "mu2(e, a) = (-1)^{|a|} a"),
        ("classical_product", "mu2(a2, a1) = (-1)^{|a1|} a2.a1"),
        ("h_product", "[a2][a1] = (-1)^{|a1|}[mu2(a2,a1)]"),
        (
            "module_left_insert",
            "(-1)^{||right|| + |p| + ||left prefix||}",
        ),
        ("module_unit_right", "mu(p; e) = p"),
        ("module_unit_left", "mu(e; p) = -(-1)^{|p|} p"),
        (
            "classical_actions",
            "mu(p;a) = p.a; mu(a;p) = -(-1)^{|p|} a.p",
        ),
        ("diagonal", "(-1)^{||a_1||+...+||a_r||+1} mu_A"),
        ("shift", "(-1)^{||a_1||+...+||a_r||+1} relative to P"),
        (
            "dual",
            "<mu_dual(a'; xi; a), p> = (-1)^{|p|+1} <xi, mu_P(a; p; a')>",
        ),
        ("twist", "(-1)^{||a||+||a'||+1} on mu^{s;1;r}"),
        ("hom_diff_outer", "(-1)^{|phi| sum||right||} mu(phi(...))"),
        ("hom_diff_inner", "-(-1)^{|phi|} phi(mu(...))"),
        (
            "compose",
            "(-1)^{|phi| sum||right||} psi(...; phi(...); ...)",
        ),
        ("h_level", "H(phi)[p] = (-1)^{|phi||p|}[phi(p)]"),
        (
            "h_actions",
            "[p].[a] = [mu(p;a)]; [a].[p] = -(-1)^{|p|}[mu(a;p)]",
        ),
        (
            "hochschild_wrap",
            "(-1)^{moved_reduced * (|p| + left_reduced)}",
        ),
        ("cc_internal", "(-1)^{|p| + ||prefix||} on word-internal mu_A"),
        ("hom_chain_duality", "(-1)^{|q|} <phi(c; p; a), q>"),
        ("rotation", "(-1)^{moved_total * remaining_total}"),
        (
            "gerstenhaber",
            "eta o xi with (-1)^{||eta||' ||xi||'}-graded antisymmetrization",
        ),
        (
            "tensor_block",
            "(-1)^{bar degree first-applied of the block}",
        ),
        ("tensor_hom_factor", "(-1)^{|phi| * passed bar degree}"),
        ("collapse_left", "(-1)^{|p| + ||gap|| + ||rext|| + 1} mu_P"),
        ("collapse_right", "(-1)^{||rext||} mu_P"),
    ];
    let mut s = String::from("sign-conventions v1\n");
    for (name, rule) in rules {
        s.push_str(name);
        s.push_str(": ");
        s.push_str(rule);
        s.push('\n');
    }
    s
}

/// Stable FNV-1a hash of the convention listing, reported as provenance.
pub fn convention_hash() -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in convention_listing().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_within_a_build() {
        assert_eq!(convention_hash(), convention_hash());
        assert_eq!(convention_hash().len(), 16);
    }

    #[test]
    fn parities_match_documented_formulas() {
        assert_eq!(unit_left_parity(3), 3);
        assert_eq!(diagonal_parity(2), 3);
        assert_eq!(dual_parity(0), 1);
        assert_eq!(h_left_action_parity(1), 2);
        assert_eq!(gerstenhaber_bracket_parity(1, 1), 1);
    }
}
