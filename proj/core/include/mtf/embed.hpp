#ifndef MTF_EMBED_HPP
#define MTF_EMBED_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mtf/analysis.hpp"

namespace mtf::embed {

struct EmbedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : EmbedError {
    using EmbedError::EmbedError;
};
struct DimensionMismatch : EmbedError {
    using EmbedError::EmbedError;
};
struct NonFiniteValue : EmbedError {
    using EmbedError::EmbedError;
};
struct ShapeMismatch : EmbedError {
    using EmbedError::EmbedError;
};
struct ZeroNormRow : EmbedError {
    using EmbedError::EmbedError;
};
struct NonPositiveTau : EmbedError {
    using EmbedError::EmbedError;
};
struct DegenerateCovariance : EmbedError {
    using EmbedError::EmbedError;
};
struct TooFewPoints : EmbedError {
    using EmbedError::EmbedError;
};
struct AllDuplicates : EmbedError {
    using EmbedError::EmbedError;
};

struct EmbeddingSet {
    Eigen::MatrixXd rows;  // n x d, all entries finite
    std::vector<std::string> labels;

    Eigen::Index n() const { return rows.rows(); }
    Eigen::Index d() const { return rows.cols(); }
};

// EMB1 binary ("EMB1", u32le n, u32le d, n*d f32 row-major) or CSV with a
// header row; format chosen by magic sniffing.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_emb1(const EmbeddingSet& e, const std::filesystem::path& path);

// Histogram of per-row cosine similarities sim(z_i, zbar_i) over `bins`
// equal-width bins on [-1, 1].
analysis::Histogram cosine_pair_density(const EmbeddingSet& z, const EmbeddingSet& zbar,
                                        int bins);

struct ContrastiveReport {
    double tau = 0.0;
    std::vector<double> per_example_loss;
    double mean_loss = 0.0;
};

// In-batch softmax over pairwise cosine similarities:
// l_i = -log exp(sim(z_i, zbar_i)/tau) / sum_j exp(sim(z_i, zbar_j)/tau),
// evaluated with a log-sum-exp shift.
ContrastiveReport contrastive_loss(const EmbeddingSet& z, const EmbeddingSet& zbar,
                                   double tau);

// Count of covariance eigenvalues above alpha * lambda_max.
double id_lpca(const EmbeddingSet& e, double alpha = 0.05);

struct MomResult {
    double estimate = 0.0;
    int k = 20;
    std::int64_t excluded = 0;  // points whose k-NN distances were all equal
};

// Method-of-moments local estimate m1/(w - m1) from the k nearest-neighbor
// distances, averaged over points.
MomResult id_mom(const EmbeddingSet& e, int k = 20);

struct TwonnResult {
    double estimate = 0.0;
    double discard_fraction = 0.1;
    std::int64_t skipped_duplicates = 0;
};

// TwoNN estimate: slope of -log(1 - F) against log(mu) for mu_i = r2/r1,
// with the largest discard_fraction of the ratios dropped.
TwonnResult id_twonn(const EmbeddingSet& e, double discard_fraction = 0.1);

struct FishersResult {
    double estimate = 0.0;
    double selected_alpha = 0.0;
    // (alpha, mean fraction of inseparable ordered pairs) per alpha.
    std::vector<std::pair<double, double>> profile;
};

std::vector<double> fishers_default_alphas();

// Fisher-separability profile after centering, PCA reduction, whitening and
// projection to the unit sphere; inverted through the n-sphere
// inseparability probability.
FishersResult id_fishers(const EmbeddingSet& e, std::vector<double> alphas = {});

struct IdEstimates {
    double lpca = 0.0;
    double mom = 0.0;
    double twonn = 0.0;
    double fishers = 0.0;
    double lpca_alpha = 0.05;
    int mom_k = 20;
    double twonn_discard = 0.1;
    double fishers_alpha = 0.0;
};

IdEstimates estimate_all(const EmbeddingSet& e, double lpca_alpha = 0.05, int mom_k = 20,
                         double twonn_discard = 0.1, std::vector<double> alphas = {});

}  // namespace mtf::embed

#endif
