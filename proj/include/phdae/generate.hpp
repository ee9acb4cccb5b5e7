#ifndef PHDAE_GENERATE_HPP
#define PHDAE_GENERATE_HPP

#include <string>

#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// The six benchmark categories: differentiation index combined with
/// whether the transfer function has an improper part.
enum class Category {
    Index0,
    Index1,
    ProperIndex2,
    ImproperIndex2,
    ProperIndex12,
    ImproperIndex12,
};

Category category_from_string(const std::string& s);
std::string to_string(Category c);

/// Random staircase generator. Block dimensions must be consistent with
/// the category (checked); improper categories force G4 != 0, proper
/// ones G4 = 0. Construction is deterministic under the seed and valid
/// by construction: banded SPD E blocks, banded skew J with invertible
/// J41, R from banded Cholesky-like factors, and P sampled inside the
/// Schur feasibility region of the extended dissipation matrix.
struct GeneratorSpec {
    Category category = Category::Index0;
    Index n1 = 0, n2 = 10, n3 = 0, n4 = 0, m = 1;
    unsigned seed = 0;
    Index bandwidth = 2;       // half band width of the sparse blocks
    double coupling = 0.5;     // off-diagonal magnitude scale
    bool with_feedthrough_coupling = true;  // sample nonzero P when feasible

    void check() const;  // throws StructuralError on infeasible dims
};

StaircaseSystem generate_staircase(const GeneratorSpec& spec);

enum class LadderVariant { Index1Like, Index12Like };

/// Per-branch physical parameters of the RCL ladder. Vectors are sized
/// by the generator helpers; all entries must be positive.
struct LadderParams {
    Vec capacitance;       // shunt capacitors, one per dynamic node
    Vec inductance;        // series inductors between nodes
    Vec resistance;        // series resistors (one per inductor branch)
    double rs_in = 1.0;    // port source resistor (index-1 variant, both ports)
    double rs_out = 1.0;
    double load = 1.0;     // terminating resistor of the trailing chain
    double c_port = 1.0;   // port capacitor of the index-1-2 variant
    double r_shunt = 0.0;  // optional resistor across the source terminals of
                           // the index-1-2 variant (0 = absent); a positive
                           // value adds the proper feedthrough 1/r_shunt

    /// Mildly varying parameters around the given base values,
    /// deterministic under the seed.
    static LadderParams make(Index cells, double c_base, double l_base,
                             double r_base, unsigned seed = 0);
};

/// MNA-style RCL ladder assembled directly in staircase form.
/// Index1Like: two resistive voltage-source ports, dims (0, 2c-1, c+1, 0).
/// Index12Like: one ideal voltage-source port across the port capacitor,
/// which produces an index-2 pair and Dinf = c_port != 0;
/// dims (1, 2c-1, c, 1).
StaircaseSystem generate_rcl_ladder(Index cells, const LadderParams& params,
                                    LadderVariant variant);

}  // namespace phdae

#endif
