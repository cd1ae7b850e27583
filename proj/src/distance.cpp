#include "abxlab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abxlab/error.hpp"

namespace abxlab {

void DtwConfig::validate() const {
    if (!(zero_vector_distance >= 0.0 && zero_vector_distance <= 2.0))
        throw Error(ErrorKind::argument, "zero_vector_distance must lie in [0, 2]");
}

namespace {

// Scales `in` by 1/max|in_i| into `out` and returns the squared norm of the
// result (0 for an all-zero vector).
double normalise(std::span<const double> in, double* out) {
    double peak = 0.0;
    for (double v : in) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) {
        std::fill(out, out + in.size(), 0.0);
        return 0.0;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = in[i] / peak;
        sq += out[i] * out[i];
    }
    return sq;
}

// For a == b this is exactly 0: sqrt(fl(n * n)) == n in binary floating point.
double cosine_from_normalised(const double* a, double na, const double* b, double nb, std::size_t n,
                              double zero_distance) {
    if (na == 0.0 || nb == 0.0) return zero_distance;
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
    const double cos = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    return 1.0 - cos;
}

}  // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b, const DtwConfig& cfg) {
    if (a.size() != b.size())
        throw Error(ErrorKind::argument, "cosine distance of vectors with different dimensions");
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite))
        throw Error(ErrorKind::data, "cosine distance of non-finite vector");
    std::vector<double> na(a.size()), nb(b.size());
    const double sa = normalise(a, na.data());
    const double sb = normalise(b, nb.data());
    return cosine_from_normalised(na.data(), sa, nb.data(), sb, a.size(), cfg.zero_vector_distance);
}

PreparedFrames::PreparedFrames(const FrameMatrix& frames)
    : rows_(frames.rows()), cols_(frames.cols()), scaled_(frames.values().size()), self_dot_(frames.rows()) {
    for (std::size_t r = 0; r < rows_; ++r) self_dot_[r] = normalise(frames.row(r), scaled_.data() + r * cols_);
}

double frame_distance(const PreparedFrames& a, std::size_t i, const PreparedFrames& b, std::size_t j,
                      const DtwConfig& cfg) {
    return cosine_from_normalised(a.row(i).data(), a.self_dot(i), b.row(j).data(), b.self_dot(j), a.cols(),
                                  cfg.zero_vector_distance);
}

double dtw_dissimilarity(const PreparedFrames& a, const PreparedFrames& x, const DtwConfig& cfg) {
    if (a.rows() == 0 || x.rows() == 0) throw Error(ErrorKind::argument, "DTW of an empty frame matrix");
    if (a.cols() != x.cols()) throw Error(ErrorKind::argument, "DTW of matrices with different dimensions");

    const std::size_t m = a.rows();
    const std::size_t n = x.rows();
    // best[j][k]: minimal accumulated cost of a path from (0, 0) to (i, j)
    // through exactly k + 1 cells, over rolling rows of i. A path to (i, j)
    // has between max(i, j) + 1 and i + j + 1 cells.
    const std::size_t max_len = m + n - 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n * max_len, inf), cur(n * max_len, inf);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        for (std::size_t j = 0; j < n; ++j) {
            double* out = &cur[j * max_len];
            const double c = frame_distance(a, i, x, j, cfg);
            if (i == 0 && j == 0) {
                out[0] = c;
                continue;
            }
            const double* diag = i > 0 && j > 0 ? &prev[(j - 1) * max_len] : nullptr;
            const double* up = i > 0 ? &prev[j * max_len] : nullptr;
            const double* left = j > 0 ? &cur[(j - 1) * max_len] : nullptr;
            for (std::size_t k = std::max(i, j); k <= i + j; ++k) {
                double p = inf;
                if (diag) p = std::min(p, diag[k - 1]);
                if (up) p = std::min(p, up[k - 1]);
                if (left) p = std::min(p, left[k - 1]);
                out[k] = p + c;
            }
        }
        std::swap(prev, cur);
    }
    const double* last = &prev[(n - 1) * max_len];
    double best = inf;
    for (std::size_t k = std::max(m, n) - 1; k < max_len; ++k)
        best = std::min(best, last[k] / static_cast<double>(k + 1));
    return best;
}

double dtw_dissimilarity(const FrameMatrix& a, const FrameMatrix& x, const DtwConfig& cfg) {
    if (a.empty() || x.empty()) throw Error(ErrorKind::argument, "DTW of an empty frame matrix");
    return dtw_dissimilarity(PreparedFrames(a), PreparedFrames(x), cfg);
}

}  // namespace abxlab
