#include "mimoep/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mimoep/rng.hpp"

namespace mimoep {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

// PEG edge placement: for each variable, connect each new edge to a not-full
// check at maximum BFS distance in the current graph (unreachable first),
// breaking ties by lowest check degree, then randomly. Distance >= 5 (or
// unreachable) keeps the girth at 6; shorter hops happen only when forced.
struct PegBuilder {
    int n, m, dv, dc;
    std::vector<std::vector<int>> var_checks;
    std::vector<std::vector<int>> check_cols;
    std::vector<int> check_deg;

    PegBuilder(int n_, int m_, int dv_, int dc_) : n(n_), m(m_), dv(dv_), dc(dc_) {
        var_checks.assign(n, {});
        check_cols.assign(m, {});
        check_deg.assign(m, 0);
    }

    // BFS over the bipartite graph from variable v; returns distance to every check
    std::vector<int> check_distances(int v) const {
        std::vector<int> cdist(m, kUnreached);
        std::vector<int> vdist(n, kUnreached);
        vdist[v] = 0;
        std::deque<int> vq{v};
        int level = 0;
        while (!vq.empty()) {
            std::deque<int> next;
            for (int vv : vq) {
                for (int c : var_checks[vv]) {
                    if (cdist[c] != kUnreached) continue;
                    cdist[c] = level + 1;
                    for (int u : check_cols[c]) {
                        if (vdist[u] == kUnreached) {
                            vdist[u] = level + 2;
                            next.push_back(u);
                        }
                    }
                }
            }
            vq.swap(next);
            level += 2;
        }
        return cdist;
    }

    void add_edge(int v, int c) {
        var_checks[v].push_back(c);
        check_cols[c].push_back(v);
        ++check_deg[c];
    }

    void build(Rng& rng) {
        std::vector<int> candidates;
        for (int v = 0; v < n; ++v) {
            for (int e = 0; e < dv; ++e) {
                std::vector<int> cdist = e == 0 ? std::vector<int>(m, kUnreached) : check_distances(v);
                // best = farthest not-full check, then lowest degree
                long best_dist = -1;
                int best_deg = dc + 1;
                candidates.clear();
                for (int c = 0; c < m; ++c) {
                    if (check_deg[c] >= dc) continue;
                    if (cdist[c] == 1) continue;  // already a neighbor
                    const long dist = cdist[c] == kUnreached ? std::numeric_limits<long>::max() : cdist[c];
                    if (dist > best_dist || (dist == best_dist && check_deg[c] < best_deg)) {
                        best_dist = dist;
                        best_deg = check_deg[c];
                        candidates.clear();
                    }
                    if (dist == best_dist && check_deg[c] == best_deg) candidates.push_back(c);
                }
                if (candidates.empty())
                    throw std::runtime_error("ldpc: PEG ran out of check sockets");
                add_edge(v, candidates[rng.index(candidates.size())]);
            }
        }
        for (auto& cc : check_cols) std::sort(cc.begin(), cc.end());
        for (auto& vc : var_checks) std::sort(vc.begin(), vc.end());
    }
};

int words_for(int bits) { return (bits + 63) / 64; }

void set_bit(std::vector<std::uint64_t>& row, int j) { row[j >> 6] ^= (1ULL << (j & 63)); }
bool get_bit(const std::vector<std::uint64_t>& row, int j) { return (row[j >> 6] >> (j & 63)) & 1ULL; }

std::vector<std::vector<std::uint64_t>> pack_rows(const std::vector<std::vector<int>>& check_cols,
                                                  int n) {
    std::vector<std::vector<std::uint64_t>> rows(check_cols.size(),
                                                 std::vector<std::uint64_t>(words_for(n), 0));
    for (std::size_t r = 0; r < check_cols.size(); ++r)
        for (int j : check_cols[r]) set_bit(rows[r], j);
    return rows;
}

int gf2_rank(std::vector<std::vector<std::uint64_t>> rows, int n) {
    int rank = 0;
    const int m = static_cast<int>(rows.size());
    for (int col = 0; col < n && rank < m; ++col) {
        int pivot = -1;
        for (int r = rank; r < m; ++r)
            if (get_bit(rows[r], col)) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r != rank && get_bit(rows[r], col))
                for (std::size_t w = 0; w < rows[r].size(); ++w) rows[r][w] ^= rows[rank][w];
        }
        ++rank;
    }
    return rank;
}

// Reduce to RREF scanning pivot columns from the right so info bits cluster
// at the front of the codeword; fills info/parity positions and encoder rows.
void build_encoder(LdpcCode& code) {
    const int m = code.num_checks();
    const int n = code.n;
    auto rows = pack_rows(code.check_cols, n);

    std::vector<int> pivot_col(m, -1);
    int rank = 0;
    for (int col = n - 1; col >= 0 && rank < m; --col) {
        int pivot = -1;
        for (int r = rank; r < m; ++r)
            if (get_bit(rows[r], col)) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r != rank && get_bit(rows[r], col))
                for (std::size_t w = 0; w < rows[r].size(); ++w) rows[r][w] ^= rows[rank][w];
        }
        pivot_col[rank] = col;
        ++rank;
    }
    if (rank != m) throw std::runtime_error("ldpc: parity matrix is rank deficient");

    std::vector<bool> is_parity(n, false);
    for (int r = 0; r < m; ++r) is_parity[pivot_col[r]] = true;
    code.parity_positions.clear();
    code.info_positions.clear();
    for (int j = 0; j < n; ++j) (is_parity[j] ? code.parity_positions : code.info_positions).push_back(j);

    std::vector<int> info_slot(n, -1);
    for (int i = 0; i < code.k; ++i) info_slot[code.info_positions[i]] = i;

    // parity bit of row r = sum of info bits present in that RREF row
    code.encoder_rows.assign(m, std::vector<std::uint64_t>(words_for(code.k), 0));
    std::vector<int> row_of_parity_pos(n, -1);
    for (int r = 0; r < m; ++r) row_of_parity_pos[pivot_col[r]] = r;
    for (int r = 0; r < m; ++r) {
        for (int j = 0; j < n; ++j) {
            if (j == pivot_col[r] || !get_bit(rows[r], j)) continue;
            if (info_slot[j] >= 0) set_bit(code.encoder_rows[r], info_slot[j]);
            // RREF guarantees no other pivot columns appear in row r
        }
    }
    // store parity positions in encoder row order
    std::vector<int> pp(m);
    for (int r = 0; r < m; ++r) pp[r] = pivot_col[r];
    code.parity_positions = std::move(pp);
}

}  // namespace

LdpcCode build_code(int n, double rate, int dv, int dc, std::uint64_t seed) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("ldpc: n must be positive and even");
    if (std::abs((1.0 - rate) * dc - dv) > 1e-9)
        throw std::invalid_argument("ldpc: inconsistent degrees, need (1-rate)*dc == dv");
    const int m = static_cast<int>(std::lround(n * (1.0 - rate)));
    if (m * dc != n * dv) throw std::invalid_argument("ldpc: edge counts do not balance");

    Rng base(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng = base.derive({0x70656761ULL, static_cast<std::uint64_t>(attempt)});
        PegBuilder peg(n, m, dv, dc);
        peg.build(rng);
        if (gf2_rank(pack_rows(peg.check_cols, n), n) != m) continue;

        LdpcCode code;
        code.n = n;
        code.k = n - m;
        code.dv = dv;
        code.dc = dc;
        code.check_cols = std::move(peg.check_cols);
        code.var_checks = std::move(peg.var_checks);
        code.build_attempts = attempt + 1;
        build_encoder(code);
        return code;
    }
    throw std::runtime_error("ldpc: could not reach full row rank in 64 attempts");
}

std::vector<std::uint8_t> encode(const LdpcCode& code, std::span<const std::uint8_t> info_bits) {
    if (info_bits.size() != static_cast<std::size_t>(code.k))
        throw std::invalid_argument("ldpc encode: expected " + std::to_string(code.k) +
                                    " info bits, got " + std::to_string(info_bits.size()));
    std::vector<std::uint64_t> s(words_for(code.k), 0);
    for (int i = 0; i < code.k; ++i)
        if (info_bits[i] & 1) set_bit(s, i);

    std::vector<std::uint8_t> cw(code.n, 0);
    for (int i = 0; i < code.k; ++i) cw[code.info_positions[i]] = info_bits[i] & 1;
    for (int r = 0; r < code.num_checks(); ++r) {
        std::uint64_t acc = 0;
        const auto& row = code.encoder_rows[r];
        for (std::size_t w = 0; w < row.size(); ++w) acc ^= row[w] & s[w];
        cw[code.parity_positions[r]] = static_cast<std::uint8_t>(__builtin_popcountll(acc) & 1);
    }
    return cw;
}

bool parity_check(const LdpcCode& code, std::span<const std::uint8_t> codeword) {
    for (const auto& cols : code.check_cols) {
        int acc = 0;
        for (int j : cols) acc ^= codeword[j] & 1;
        if (acc) return false;
    }
    return true;
}

DecodeResult decode(const LdpcCode& code, std::span<const double> channel_llrs, int max_iter) {
    if (channel_llrs.size() != static_cast<std::size_t>(code.n))
        throw std::invalid_argument("ldpc decode: LLR vector length mismatch");

    const int n = code.n;
    const int m = code.num_checks();

    // edge storage indexed per check, in check_cols order
    std::vector<std::vector<double>> v2c(m), c2v(m);
    for (int r = 0; r < m; ++r) {
        v2c[r].assign(code.check_cols[r].size(), 0.0);
        c2v[r].assign(code.check_cols[r].size(), 0.0);
    }
    // per variable: (check row, slot in that row)
    std::vector<std::vector<std::pair<int, int>>> var_edges(n);
    for (int r = 0; r < m; ++r)
        for (std::size_t s = 0; s < code.check_cols[r].size(); ++s)
            var_edges[code.check_cols[r][s]].push_back({r, static_cast<int>(s)});

    for (int r = 0; r < m; ++r)
        for (std::size_t s = 0; s < code.check_cols[r].size(); ++s)
            v2c[r][s] = channel_llrs[code.check_cols[r][s]];

    std::vector<double> posterior(channel_llrs.begin(), channel_llrs.end());
    std::vector<std::uint8_t> hard(n, 0);
    DecodeResult res;

    std::vector<double> t, fwd, bwd;
    const double kTanhCap = 1.0 - 1e-15;  // atanh(1) guard

    int iter = 0;
    bool ok = false;
    while (iter < max_iter && !ok) {
        ++iter;
        // check update, exact tanh rule via forward/backward partial products
        for (int r = 0; r < m; ++r) {
            const auto& row = code.check_cols[r];
            const std::size_t w = row.size();
            t.resize(w);
            fwd.resize(w);
            bwd.resize(w);
            for (std::size_t s = 0; s < w; ++s) t[s] = std::tanh(0.5 * v2c[r][s]);
            fwd[0] = t[0];
            for (std::size_t s = 1; s < w; ++s) fwd[s] = fwd[s - 1] * t[s];
            bwd[w - 1] = t[w - 1];
            for (std::size_t s = w - 1; s-- > 0;) bwd[s] = bwd[s + 1] * t[s];
            for (std::size_t s = 0; s < w; ++s) {
                double prod = 1.0;
                if (s > 0) prod *= fwd[s - 1];
                if (s + 1 < w) prod *= bwd[s + 1];
                prod = std::clamp(prod, -kTanhCap, kTanhCap);
                c2v[r][s] = 2.0 * std::atanh(prod);
            }
        }
        // variable update
        for (int v = 0; v < n; ++v) {
            double post = channel_llrs[v];
            for (auto [r, s] : var_edges[v]) post += c2v[r][s];
            posterior[v] = post;
            hard[v] = post < 0.0 ? 1 : 0;
            for (auto [r, s] : var_edges[v]) v2c[r][s] = post - c2v[r][s];
        }
        ok = parity_check(code, hard);
    }

    res.iterations_used = iter;
    res.parity_ok = ok;
    res.extrinsic_llrs.resize(n);
    for (int v = 0; v < n; ++v) res.extrinsic_llrs[v] = posterior[v] - channel_llrs[v];
    res.info_bits_hat.resize(code.k);
    for (int i = 0; i < code.k; ++i) res.info_bits_hat[i] = hard[code.info_positions[i]];
    return res;
}

std::string to_alist(const LdpcCode& code) {
    std::ostringstream os;
    const int m = code.num_checks();
    int max_col = 0, max_row = 0;
    for (const auto& vc : code.var_checks) max_col = std::max(max_col, static_cast<int>(vc.size()));
    for (const auto& cc : code.check_cols) max_row = std::max(max_row, static_cast<int>(cc.size()));
    os << code.n << ' ' << m << '\n';
    os << max_col << ' ' << max_row << '\n';
    for (int v = 0; v < code.n; ++v) os << code.var_checks[v].size() << (v + 1 < code.n ? ' ' : '\n');
    for (int r = 0; r < m; ++r) os << code.check_cols[r].size() << (r + 1 < m ? ' ' : '\n');
    for (int v = 0; v < code.n; ++v) {
        for (std::size_t e = 0; e < code.var_checks[v].size(); ++e)
            os << code.var_checks[v][e] + 1 << (e + 1 < code.var_checks[v].size() ? ' ' : '\n');
    }
    for (int r = 0; r < m; ++r) {
        for (std::size_t e = 0; e < code.check_cols[r].size(); ++e)
            os << code.check_cols[r][e] + 1 << (e + 1 < code.check_cols[r].size() ? ' ' : '\n');
    }
    return os.str();
}

}  // namespace mimoep
