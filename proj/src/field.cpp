#include "sigma2lab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "sigma2lab/atensor.hpp"
#include "sigma2lab/errors.hpp"

namespace sigma2lab {

namespace {
constexpr char kMagic[16] = {'S', '2', 'L', 'A', 'B', 'F', 'L', 'D',
                             '4', 0,   0,   0,   1,   0,   0,   0};  // name + version 1

static_assert(std::endian::native == std::endian::little,
              "field blobs are little-endian; big-endian hosts unsupported");
}  // namespace

ScalarField4::ScalarField4(Index4 extents, std::array<double, 4> spacing, Vec4 origin)
    : extents_(extents), spacing_(spacing), origin_(origin) {
    std::int64_t n = 1;
    for (int a = 0; a < 4; ++a) {
        if (extents_[a] < 5) throw Error("ScalarField4: extent must be >= 5 per axis");
        if (!(spacing_[a] > 0.0)) throw Error("ScalarField4: spacing must be positive");
        n *= extents_[a];
    }
    samples_.assign(static_cast<std::size_t>(n), 0.0);
}

ScalarField4 ScalarField4::sample(Index4 extents, std::array<double, 4> spacing, Vec4 origin,
                                  const std::function<double(const Vec4&)>& f) {
    ScalarField4 fld(extents, spacing, origin);
    Index4 idx{};
    for (idx[0] = 0; idx[0] < extents[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < extents[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < extents[2]; ++idx[2])
                for (idx[3] = 0; idx[3] < extents[3]; ++idx[3])
                    fld.at(idx) = f(fld.point(idx));
    return fld;
}

Jet2 ScalarField4::jet_at(const Index4& idx) const {
    if (!interior(idx, 2)) throw IndexError("jet_at: index within 2 cells of a face");
    Jet2 j;
    j.value = at(idx);
    auto shifted = [&](int a, int da, int b = -1, int db = 0) {
        Index4 q = idx;
        q[a] += da;
        if (b >= 0) q[b] += db;
        return at(q);
    };
    for (int a = 0; a < 4; ++a) {
        const double h = spacing_[a];
        j.gradient[a] = (shifted(a, 1) - shifted(a, -1)) / (2.0 * h);
        j.hessian.set(a, a, (shifted(a, 1) - 2.0 * j.value + shifted(a, -1)) / (h * h));
    }
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            const double ha = spacing_[a], hb = spacing_[b];
            const double v = (shifted(a, 1, b, 1) - shifted(a, 1, b, -1) - shifted(a, -1, b, 1) +
                              shifted(a, -1, b, -1)) /
                             (4.0 * ha * hb);
            j.hessian.set(a, b, v);
        }
    return j;
}

double ScalarField4::oscillation() const {
    const auto [lo, hi] = std::minmax_element(samples_.begin(), samples_.end());
    return *hi - *lo;
}

double ScalarField4::critical_grad_threshold() const {
    const double hmin = std::min({spacing_[0], spacing_[1], spacing_[2], spacing_[3]});
    return 1e-8 * oscillation() / hmin;
}

double ScalarField4::value_interp(const Vec4& x) const {
    Index4 base{};
    double w[4];
    for (int a = 0; a < 4; ++a) {
        const double t = (x[a] - origin_[a]) / spacing_[a];
        double fl = std::floor(t);
        std::int64_t i = static_cast<std::int64_t>(fl);
        if (i < 0 || i >= extents_[a] - 1) {
            if (i == extents_[a] - 1 && t <= static_cast<double>(i) + 1e-12) {
                i -= 1;
                fl -= 1.0;
            } else {
                throw DomainError("value_interp: point outside the sample hull");
            }
        }
        base[a] = i;
        w[a] = t - fl;
    }
    double v = 0.0;
    for (int corner = 0; corner < 16; ++corner) {
        Index4 q = base;
        double wt = 1.0;
        for (int a = 0; a < 4; ++a) {
            const int bit = (corner >> a) & 1;
            q[a] += bit;
            wt *= bit ? w[a] : (1.0 - w[a]);
        }
        v += wt * at(q);
    }
    return v;
}

void ScalarField4::write_blob(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("write_blob: cannot open " + path);
    std::fwrite(kMagic, 1, 16, fp);
    for (int a = 0; a < 4; ++a) {
        const std::uint64_t e = static_cast<std::uint64_t>(extents_[a]);
        std::fwrite(&e, 8, 1, fp);
    }
    std::fwrite(spacing_.data(), 8, 4, fp);
    std::fwrite(origin_.data(), 8, 4, fp);
    std::fwrite(samples_.data(), 8, samples_.size(), fp);
    std::fclose(fp);
}

ScalarField4 ScalarField4::read_blob(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw Error("read_blob: cannot open " + path);
    char magic[16];
    if (std::fread(magic, 1, 16, fp) != 16 || std::memcmp(magic, kMagic, 16) != 0) {
        std::fclose(fp);
        throw Error("read_blob: bad magic/version in " + path);
    }
    Index4 extents{};
    std::array<double, 4> spacing{};
    Vec4 origin{};
    for (int a = 0; a < 4; ++a) {
        std::uint64_t e = 0;
        if (std::fread(&e, 8, 1, fp) != 1) {
            std::fclose(fp);
            throw Error("read_blob: truncated header");
        }
        extents[a] = static_cast<std::int64_t>(e);
    }
    if (std::fread(spacing.data(), 8, 4, fp) != 4 || std::fread(origin.data(), 8, 4, fp) != 4) {
        std::fclose(fp);
        throw Error("read_blob: truncated header");
    }
    ScalarField4 fld(extents, spacing, origin);
    const std::size_t n = fld.samples_.size();
    if (std::fread(fld.samples_.data(), 8, n, fp) != n) {
        std::fclose(fp);
        throw Error("read_blob: truncated samples");
    }
    std::fclose(fp);
    return fld;
}

double divergence_residual_grid(const ScalarField4& field, double rho, const Index4& idx) {
    if (!field.interior(idx, 3))
        throw IndexError("divergence_residual_grid: index within 3 cells of a face");
    const Jet2 j0 = field.jet_at(idx);
    const double lhs = sigma_k(assemble_A(j0, rho), 2);

    auto b_component = [&](const Index4& q, int comp) {
        const Jet2 j = field.jet_at(q);
        const double lap = j.hessian.trace();
        const double g2 = dot(j.gradient, j.gradient);
        double v = -lap * j.gradient[comp] - rho * g2 * j.gradient[comp];
        for (int i = 0; i < 4; ++i) v += j.hessian(i, comp) * j.gradient[i];
        return v;
    };
    double div_b = 0.0;
    for (int a = 0; a < 4; ++a) {
        Index4 p = idx, m = idx;
        p[a] += 1;
        m[a] -= 1;
        div_b += (b_component(p, a) - b_component(m, a)) / (2.0 * field.spacing(a));
    }
    return std::abs(lhs + 0.5 * div_b);
}

ConeSweep cone_sweep(const ScalarField4& field, double rho, int margin) {
    ConeSweep sweep;
    Index4 idx{};
    for (idx[0] = margin; idx[0] < field.extent(0) - margin; ++idx[0])
        for (idx[1] = margin; idx[1] < field.extent(1) - margin; ++idx[1])
            for (idx[2] = margin; idx[2] < field.extent(2) - margin; ++idx[2])
                for (idx[3] = margin; idx[3] < field.extent(3) - margin; ++idx[3]) {
                    const ConeStatus st = cone_status(assemble_A(field.jet_at(idx), rho));
                    ++sweep.checked;
                    if (st.in_gamma2_plus)
                        ++sweep.in_plus;
                    else if (st.in_gamma2_minus)
                        ++sweep.in_minus;
                    else if (st.on_boundary)
                        ++sweep.on_boundary;
                    else {
                        ++sweep.outside;
                        if (sweep.first_offenders.size() < 8) sweep.first_offenders.push_back(idx);
                    }
                }
    return sweep;
}

}  // namespace sigma2lab
