#pragma once

#include <span>
#include <vector>

#include "abxlab/corpus_io.hpp"

namespace abxlab {

struct DtwConfig {
    /// Distance assigned when either frame has zero norm. Must lie in [0, 2].
    double zero_vector_distance = 1.0;

    void validate() const;
};

/// 1 - cos(a, b), in [0, 2].
///
/// Each vector is first divided by its largest absolute component. The
/// division is correctly rounded, so inputs that differ by an exactly
/// representable positive factor normalise to identical bits and produce
/// identical distances.
double cosine_distance(std::span<const double> a, std::span<const double> b, const DtwConfig& cfg = {});

/// Frames of one segment normalised once for repeated distance evaluation.
class PreparedFrames {
public:
    PreparedFrames() = default;
    explicit PreparedFrames(const FrameMatrix& frames);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t r) const { return {scaled_.data() + r * cols_, cols_}; }
    double self_dot(std::size_t r) const { return self_dot_[r]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> scaled_;
    std::vector<double> self_dot_;  // 0 marks an all-zero frame
};

/// Cosine distance between two prepared frames.
double frame_distance(const PreparedFrames& a, std::size_t i, const PreparedFrames& b, std::size_t j,
                      const DtwConfig& cfg);

/// DTW over the cosine cost grid with diagonal/vertical/horizontal steps.
/// Returns the smallest mean cell cost over all monotone paths from the first
/// to the last cell.
double dtw_dissimilarity(const PreparedFrames& a, const PreparedFrames& x, const DtwConfig& cfg);
double dtw_dissimilarity(const FrameMatrix& a, const FrameMatrix& x, const DtwConfig& cfg = {});

}  // namespace abxlab
