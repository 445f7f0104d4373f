#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sigma2lab/jet.hpp"
#include "sigma2lab/symmat.hpp"
#include "sigma2lab/vec4.hpp"

namespace sigma2lab {

using Index4 = std::array<std::int64_t, 4>;

// Scalar samples on a uniform 4-D grid. Samples are stored row-major with
// the x^4 axis fastest; immutable after construction in normal use.
class ScalarField4 {
public:
    ScalarField4(Index4 extents, std::array<double, 4> spacing, Vec4 origin);

    static ScalarField4 sample(Index4 extents, std::array<double, 4> spacing, Vec4 origin,
                               const std::function<double(const Vec4&)>& f);

    std::int64_t extent(int axis) const { return extents_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    const Vec4& origin() const { return origin_; }
    std::int64_t size() const { return static_cast<std::int64_t>(samples_.size()); }

    std::int64_t linear(const Index4& idx) const {
        return ((idx[0] * extents_[1] + idx[1]) * extents_[2] + idx[2]) * extents_[3] + idx[3];
    }
    double at(const Index4& idx) const { return samples_[linear(idx)]; }
    double& at(const Index4& idx) { return samples_[linear(idx)]; }
    const std::vector<double>& samples() const { return samples_; }

    Vec4 point(const Index4& idx) const {
        return {origin_[0] + idx[0] * spacing_[0], origin_[1] + idx[1] * spacing_[1],
                origin_[2] + idx[2] * spacing_[2], origin_[3] + idx[3] * spacing_[3]};
    }

    bool interior(const Index4& idx, int margin = 2) const {
        for (int a = 0; a < 4; ++a)
            if (idx[a] < margin || idx[a] >= extents_[a] - margin) return false;
        return true;
    }

    // Centred second-order stencils; requires >= 2 cells from every face.
    Jet2 jet_at(const Index4& idx) const;

    double oscillation() const;
    // Cells with |grad u| below this are treated as (near-)critical and
    // excluded from surface quantities.
    double critical_grad_threshold() const;

    // Multilinear interpolation; x must lie inside the sample hull.
    double value_interp(const Vec4& x) const;

    void write_blob(const std::string& path) const;
    static ScalarField4 read_blob(const std::string& path);

private:
    Index4 extents_;
    std::array<double, 4> spacing_;
    Vec4 origin_;
    std::vector<double> samples_;
};

// Divergence-structure residual with nested second-order stencils; requires
// the index to be >= 3 cells from every face.
double divergence_residual_grid(const ScalarField4& field, double rho, const Index4& idx);

struct ConeSweep {
    std::int64_t checked = 0;
    std::int64_t in_plus = 0;
    std::int64_t in_minus = 0;
    std::int64_t on_boundary = 0;
    std::int64_t outside = 0;
    std::vector<Index4> first_offenders;  // up to 8 cells outside both cones
};

ConeSweep cone_sweep(const ScalarField4& field, double rho, int margin = 2);

}  // namespace sigma2lab
