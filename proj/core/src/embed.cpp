#include "mtf/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mtf::embed {

namespace {

void check_finite(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw NonFiniteValue("embedding matrix contains NaN or Inf");
}

EmbeddingSet load_emb1(std::ifstream& f) {
    char magic[4];
    f.read(magic, 4);
    std::uint8_t hdr[8];
    f.read(reinterpret_cast<char*>(hdr), 8);
    if (!f) throw BadMagic("truncated EMB1 header");
    auto u32 = [&](int off) {
        return std::uint32_t(hdr[off]) | (std::uint32_t(hdr[off + 1]) << 8) |
               (std::uint32_t(hdr[off + 2]) << 16) | (std::uint32_t(hdr[off + 3]) << 24);
    };
    const std::uint32_t n = u32(0), d = u32(4);
    if (n == 0 || d == 0) throw DimensionMismatch("EMB1 with zero rows or columns");
    EmbeddingSet e;
    e.rows.resize(n, d);
    std::vector<float> buf(static_cast<std::size_t>(n) * d);
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw DimensionMismatch("EMB1 payload shorter than n*d floats");
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < d; ++j)
            e.rows(i, j) = buf[static_cast<std::size_t>(i) * d + j];
    check_finite(e.rows);
    return e;
}

EmbeddingSet load_csv(std::ifstream& f) {
    std::string line;
    if (!std::getline(f, line)) throw BadMagic("empty CSV file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    EmbeddingSet e;
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const std::size_t d = header.size();
    if (d == 0) throw DimensionMismatch("CSV header has no columns");
    std::vector<double> values;
    std::size_t n = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw NonFiniteValue("non-numeric CSV cell: " + cell);
            }
            if (pos != cell.size()) throw NonFiniteValue("non-numeric CSV cell: " + cell);
            values.push_back(v);
            ++cols;
        }
        if (cols != d) throw DimensionMismatch("CSV row width differs from header");
        ++n;
    }
    if (n == 0) throw DimensionMismatch("CSV has no data rows");
    e.rows.resize(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) e.rows(i, j) = values[i * d + j];
    check_finite(e.rows);
    return e;
}

Eigen::VectorXd row_norms(const EmbeddingSet& e) {
    Eigen::VectorXd norms = e.rows.rowwise().norm();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
        if (norms(i) == 0.0) throw ZeroNormRow("zero-norm embedding row " + std::to_string(i));
    return norms;
}

void check_shapes(const EmbeddingSet& z, const EmbeddingSet& zbar) {
    if (z.n() != zbar.n() || z.d() != zbar.d())
        throw ShapeMismatch("embedding sets have different shapes");
    if (z.n() < 1) throw ShapeMismatch("empty embedding set");
}

// Sorted distances to the k nearest neighbors of row i (self excluded).
std::vector<double> knn_distances(const Eigen::MatrixXd& x, Eigen::Index i, int k) {
    const Eigen::Index n = x.rows();
    std::vector<double> d2(static_cast<std::size_t>(n) - 1);
    std::size_t w = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        d2[w++] = (x.row(i) - x.row(j)).squaredNorm();
    }
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    d2.resize(k);
    std::sort(d2.begin(), d2.end());
    for (auto& v : d2) v = std::sqrt(v);
    return d2;
}

}  // namespace

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BadMagic("cannot open " + path.string());
    char magic[4] = {0, 0, 0, 0};
    f.read(magic, 4);
    if (!f) throw BadMagic("file shorter than 4 bytes");
    f.seekg(0);
    if (std::memcmp(magic, "EMB1", 4) == 0) return load_emb1(f);
    return load_csv(f);
}

void save_emb1(const EmbeddingSet& e, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write("EMB1", 4);
    auto put_u32 = [&](std::uint32_t v) {
        std::uint8_t b[4] = {static_cast<std::uint8_t>(v & 0xff),
                             static_cast<std::uint8_t>((v >> 8) & 0xff),
                             static_cast<std::uint8_t>((v >> 16) & 0xff),
                             static_cast<std::uint8_t>((v >> 24) & 0xff)};
        f.write(reinterpret_cast<char*>(b), 4);
    };
    put_u32(static_cast<std::uint32_t>(e.n()));
    put_u32(static_cast<std::uint32_t>(e.d()));
    for (Eigen::Index i = 0; i < e.n(); ++i)
        for (Eigen::Index j = 0; j < e.d(); ++j) {
            float v = static_cast<float>(e.rows(i, j));
            f.write(reinterpret_cast<char*>(&v), 4);
        }
}

analysis::Histogram cosine_pair_density(const EmbeddingSet& z, const EmbeddingSet& zbar,
                                        int bins) {
    check_shapes(z, zbar);
    if (bins < 1) throw ShapeMismatch("bin count must be positive");
    Eigen::VectorXd nz = row_norms(z), nzb = row_norms(zbar);

    analysis::Histogram h;
    h.kind = analysis::HistKind::CosineSimilarity;
    h.lo = -1.0;
    h.hi = 1.0;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < z.n(); ++i) {
        double sim = z.rows.row(i).dot(zbar.rows.row(i)) / (nz(i) * nzb(i));
        sim = std::clamp(sim, -1.0, 1.0);
        int b = static_cast<int>((sim - h.lo) / (h.hi - h.lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[b];
    }
    return h;
}

ContrastiveReport contrastive_loss(const EmbeddingSet& z, const EmbeddingSet& zbar,
                                   double tau) {
    check_shapes(z, zbar);
    if (!(tau > 0.0)) throw NonPositiveTau("temperature must be positive");
    Eigen::VectorXd nz = row_norms(z), nzb = row_norms(zbar);

    const Eigen::Index n = z.n();
    Eigen::MatrixXd sim = z.rows * zbar.rows.transpose();
    sim.array().colwise() /= nz.array();
    sim.array().rowwise() /= nzb.transpose().array();
    sim /= tau;

    ContrastiveReport rep;
    rep.tau = tau;
    rep.per_example_loss.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = sim.row(i).maxCoeff();
        double lse = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) lse += std::exp(sim(i, j) - m);
        lse = m + std::log(lse);
        double li = lse - sim(i, i);
        rep.per_example_loss[static_cast<std::size_t>(i)] = li;
        total += li;
    }
    rep.mean_loss = total / static_cast<double>(n);
    return rep;
}

double id_lpca(const EmbeddingSet& e, double alpha) {
    if (e.n() < 2) throw TooFewPoints("lPCA needs at least 2 points");
    Eigen::MatrixXd centered = e.rows.rowwise() - e.rows.colwise().mean();
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(e.n() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    Eigen::VectorXd ev = solver.eigenvalues();  // ascending
    const double lmax = ev(ev.size() - 1);
    if (lmax <= 0.0) throw DegenerateCovariance("all points identical");
    int count = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > alpha * lmax) ++count;
    return static_cast<double>(count);
}

MomResult id_mom(const EmbeddingSet& e, int k) {
    if (k < 2) throw TooFewPoints("MOM needs k >= 2");
    if (e.n() <= k) throw TooFewPoints("MOM needs more points than k");
    MomResult res;
    res.k = k;
    double sum = 0.0;
    std::int64_t used = 0;
    for (Eigen::Index i = 0; i < e.n(); ++i) {
        auto r = knn_distances(e.rows, i, k);
        const double w = r.back();
        const double m1 = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(k);
        if (!(w > m1)) {
            ++res.excluded;
            continue;
        }
        sum += m1 / (w - m1);
        ++used;
    }
    if (used == 0) throw AllDuplicates("no point had distinct neighbor distances");
    res.estimate = sum / static_cast<double>(used);
    return res;
}

TwonnResult id_twonn(const EmbeddingSet& e, double discard_fraction) {
    if (e.n() < 3) throw TooFewPoints("TwoNN needs at least 3 points");
    TwonnResult res;
    res.discard_fraction = discard_fraction;
    std::vector<double> mu;
    mu.reserve(static_cast<std::size_t>(e.n()));
    for (Eigen::Index i = 0; i < e.n(); ++i) {
        auto r = knn_distances(e.rows, i, 2);
        if (r[0] <= 0.0) {
            ++res.skipped_duplicates;  // exact duplicate among the two NN
            continue;
        }
        mu.push_back(r[1] / r[0]);
    }
    if (mu.empty()) throw AllDuplicates("every point duplicates its nearest neighbor");
    std::sort(mu.begin(), mu.end());
    const std::size_t n = mu.size();
    if (n < 2) {
        res.estimate = static_cast<double>(e.d());
        return res;
    }
    std::size_t keep = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (1.0 - discard_fraction)));
    keep = std::clamp<std::size_t>(keep, 1, n - 1);
    // For intrinsic dimension d, P(mu > x) = x^-d, so -log(1 - F(mu)) is
    // linear in log(mu) with slope d. Fit that slope through the origin over
    // the retained ratios; a plain truncated-mean MLE would be biased high.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
        const double b = std::log(mu[i]);
        const double a = -std::log(1.0 - static_cast<double>(i + 1) / static_cast<double>(n));
        num += a * b;
        den += b * b;
    }
    if (den <= 0.0) {
        // All retained ratios are 1 (e.g. perfectly symmetric point sets);
        // fall back to the ambient dimension.
        res.estimate = static_cast<double>(e.d());
        return res;
    }
    res.estimate = num / den;
    return res;
}

std::vector<double> fishers_default_alphas() {
    return {0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
}

namespace {

// Probability that two independent uniform points on the n-sphere are
// Fisher-inseparable at threshold alpha.
double sphere_inseparability(double n, double alpha) {
    return std::pow(1.0 - alpha * alpha, (n + 1.0) / 2.0) /
           (alpha * std::sqrt(2.0 * M_PI * n));
}

double invert_inseparability(double p, double alpha, double cap) {
    const double lo_n = 1e-2;
    if (p >= sphere_inseparability(lo_n, alpha)) return lo_n;
    if (p <= sphere_inseparability(cap, alpha)) return cap;
    double lo = lo_n, hi = cap;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sphere_inseparability(mid, alpha) > p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FishersResult id_fishers(const EmbeddingSet& e, std::vector<double> alphas) {
    if (e.n() < 3) throw TooFewPoints("FisherS needs at least 3 points");
    if (alphas.empty()) alphas = fishers_default_alphas();
    std::sort(alphas.begin(), alphas.end());

    // Center, reduce to non-degenerate principal components, whiten, then
    // project to the unit sphere.
    Eigen::MatrixXd centered = e.rows.rowwise() - e.rows.colwise().mean();
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(e.n() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    Eigen::VectorXd ev = solver.eigenvalues();
    const double lmax = ev(ev.size() - 1);
    if (lmax <= 0.0) throw TooFewPoints("all points identical");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > 1e-10 * lmax) keep.push_back(i);
    Eigen::MatrixXd proj(e.d(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        proj.col(static_cast<Eigen::Index>(c)) =
            solver.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
    Eigen::MatrixXd x = centered * proj;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double nrm = x.row(i).norm();
        if (nrm > 0.0) x.row(i) /= nrm;
    }

    const Eigen::Index n = x.rows();
    std::vector<std::int64_t> insep(alphas.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd dots = x * x.row(i).transpose();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double g = dots(j);
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                if (g >= alphas[a]) ++insep[a];
                else break;  // alphas ascending
            }
        }
    }

    FishersResult res;
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
    const double cap = static_cast<double>(e.d());
    std::vector<double> estimates(alphas.size());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        double p = static_cast<double>(insep[a]) / pairs;
        res.profile.emplace_back(alphas[a], p);
        estimates[a] = p > 0.0 ? invert_inseparability(p, alphas[a], cap) : cap;
    }
    // Select the largest alpha still backed by enough inseparable pairs for a
    // stable fraction; fall back to the smallest alpha.
    std::size_t sel = 0;
    for (std::size_t a = 0; a < alphas.size(); ++a)
        if (insep[a] >= 10) sel = a;
    res.selected_alpha = alphas[sel];
    res.estimate = std::clamp(estimates[sel], 1e-3, cap);
    return res;
}

IdEstimates estimate_all(const EmbeddingSet& e, double lpca_alpha, int mom_k,
                         double twonn_discard, std::vector<double> alphas) {
    IdEstimates out;
    out.lpca_alpha = lpca_alpha;
    out.mom_k = mom_k;
    out.twonn_discard = twonn_discard;
    out.lpca = id_lpca(e, lpca_alpha);
    out.mom = id_mom(e, mom_k).estimate;
    out.twonn = id_twonn(e, twonn_discard).estimate;
    auto f = id_fishers(e, std::move(alphas));
    out.fishers = f.estimate;
    out.fishers_alpha = f.selected_alpha;
    return out;
}

}  // namespace mtf::embed
