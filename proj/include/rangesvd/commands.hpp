#pragma once
//
// Command implementations behind the CLI binary. Each command takes a
// plain options struct, writes results to the given streams and returns
// the process exit code:
//
//   0  success
//   1  usage / bad parameter
//   2  data, format or I/O problem
//   3  verification failure
//

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <rangesvd/analysis.hpp>
#include <rangesvd/csv.hpp>
#include <rangesvd/query.hpp>
#include <rangesvd/serialize.hpp>
#include <rangesvd/store.hpp>

namespace rangesvd {

namespace detail {

/// 17 significant digits: enough to round-trip any 64-bit float.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_value(m(i, j));
        }
        out << '\n';
    }
    if (!out.flush()) {
        throw IoError("write to '" + path + "' failed");
    }
}

inline void write_vector_csv(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    for (double v : values) {
        out << format_value(v) << '\n';
    }
    if (!out.flush()) {
        throw IoError("write to '" + path + "' failed");
    }
}

template <typename Fn>
double timed_ms(Fn&& fn) {
    const auto begin = std::chrono::steady_clock::now();
    fn();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - begin).count();
}

template <typename Fn>
int run_command(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const InvalidParameterError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace detail

struct IngestOptions {
    std::string input;
    std::string store;
    std::size_t block_size     = 1000;
    double      xi             = 0.98;
    bool        drop_timestamp = false;
};

/// Streams a CSV into a new store on disk and reports compression figures.
inline int cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&]() -> int {
        if (opt.block_size < 1) {
            throw InvalidParameterError("--block-size must be at least 1");
        }
        if (!(opt.xi > 0.0) || opt.xi > 1.0) {
            throw InvalidParameterError("--xi must lie in (0, 1]");
        }

        CsvReader reader(opt.input, CsvOptions{std::nullopt, opt.drop_timestamp});
        auto      first = reader.next();
        if (!first) {
            throw InvalidInputError("'" + opt.input + "' contains no data rows");
        }

        BlockStore store(opt.block_size, first->size(), opt.xi);
        store.append(*first);
        while (auto row = reader.next()) {
            store.append(*row);
        }
        save_store(store, opt.store);

        const std::size_t store_bytes = serialized_size(store);
        const std::size_t raw_bytes   = store.total_rows() * store.num_columns() * sizeof(double);
        out << "total_rows=" << store.total_rows() << "\n";
        out << "sealed_blocks=" << store.sealed().size() << "\n";
        out << "store_bytes=" << store_bytes << "\n";
        out << "raw_bytes=" << raw_bytes << "\n";
        out << "compression_ratio=" << detail::format_value(static_cast<double>(raw_bytes) /
                                                            static_cast<double>(store_bytes))
            << "\n";
        return 0;
    });
}

struct QueryOptions {
    std::string           store;
    std::size_t           start = 0;
    std::size_t           end   = 0;
    std::optional<double> xi; // defaults to the store's threshold
    std::string           out_prefix;
};

/// Answers one range query and writes U/sigma/V as CSV under the prefix.
inline int cmd_query(const QueryOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&]() -> int {
        const BlockStore store = load_store(opt.store);
        const double     xi    = opt.xi.value_or(store.energy_threshold());

        RangeSvd     answer;
        const double ms =
            detail::timed_ms([&] { answer = range_query(store, opt.start, opt.end, xi); });

        detail::write_matrix_csv(opt.out_prefix + "U.csv", answer.factors.u);
        detail::write_vector_csv(opt.out_prefix + "sigma.csv", answer.factors.sigma);
        detail::write_matrix_csv(opt.out_prefix + "V.csv", answer.factors.v);

        out << "k=" << answer.rank() << "\n";
        out << "elapsed_ms=" << detail::format_value(ms) << "\n";
        return 0;
    });
}

struct VerifyOptions {
    std::string           store;
    std::string           input; // raw CSV the store was built from
    std::size_t           start = 0;
    std::size_t           end   = 0;
    std::optional<double> xi;
    bool                  drop_timestamp = false;
};

/// Recomputes a range answer and checks its reconstruction error against
/// the raw stream within the compounded truncation budget.
inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&]() -> int {
        const BlockStore  store = load_store(opt.store);
        const DenseMatrix raw = read_csv_matrix(opt.input, CsvOptions{std::nullopt, opt.drop_timestamp});
        if (raw.rows() != store.total_rows() || raw.cols() != store.num_columns()) {
            throw InvalidInputError("raw data dimensions do not match the store");
        }
        const double xi = opt.xi.value_or(store.energy_threshold());

        RangeSvd     answer;
        const double ms =
            detail::timed_ms([&] { answer = range_query(store, opt.start, opt.end, xi); });

        const DenseMatrix slice = raw.middle_rows(opt.start, opt.end - opt.start + 1);
        const double      error = reconstruction_error(slice, answer.factors);
        const double budget = (1.0 - store.energy_threshold()) + (1.0 - xi) + 1e-6;

        out << "reconstruction_error=" << detail::format_value(error) << "\n";
        out << "query_ms=" << detail::format_value(ms) << "\n";
        out << "store_bytes=" << serialized_size(store) << "\n";
        if (error <= budget) {
            return 0;
        }
        err << "verification failed: error " << detail::format_value(error) << " exceeds budget "
            << detail::format_value(budget) << "\n";
        return 3;
    });
}

struct SearchOptions {
    std::string           store;
    std::size_t           start  = 0;
    std::size_t           end    = 0;
    std::size_t           stride = 500;
    std::size_t           top_n  = 2;
    std::optional<double> xi;
};

/// Prints the most similar fully-past windows as "window_start,similarity".
inline int cmd_search(const SearchOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&]() -> int {
        const BlockStore store = load_store(opt.store);
        const double     xi    = opt.xi.value_or(store.energy_threshold());
        const auto hits = similar_range_search(store, opt.start, opt.end, opt.stride, opt.top_n, xi);
        for (const SearchHit& hit : hits) {
            out << hit.window_start << "," << detail::format_value(hit.similarity) << "\n";
        }
        return 0;
    });
}

struct BenchOptions {
    std::string              store;
    std::vector<std::size_t> lengths;
    std::size_t              reps = 5;
    std::uint64_t            seed = 42;
    std::optional<double>    xi;
};

/// Times range queries at random offsets for every requested length and
/// prints one "length,median_ms" line per length.
inline int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&]() -> int {
        if (opt.reps < 1) {
            throw InvalidParameterError("--reps must be at least 1");
        }
        if (opt.lengths.empty()) {
            throw InvalidParameterError("--lengths must name at least one query length");
        }
        const BlockStore    store = load_store(opt.store);
        const StoreSnapshot snap  = store.snapshot();
        const double        xi    = opt.xi.value_or(store.energy_threshold());

        for (std::size_t length : opt.lengths) {
            if (length < 1 || length > snap.total_rows) {
                throw RangeError("query length " + std::to_string(length) +
                                 " exceeds the stored stream");
            }
            std::mt19937_64                            rng(opt.seed);
            std::uniform_int_distribution<std::size_t> offsets(0, snap.total_rows - length);
            std::vector<double>                        times;
            times.reserve(opt.reps);
            for (std::size_t rep = 0; rep < opt.reps; ++rep) {
                const std::size_t first = offsets(rng);
                times.push_back(detail::timed_ms(
                    [&] { (void)range_query(snap, first, first + length - 1, xi); }));
            }
            std::sort(times.begin(), times.end());
            const std::size_t mid = times.size() / 2;
            const double      median =
                times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
            out << length << "," << detail::format_value(median) << "\n";
        }
        return 0;
    });
}

} // namespace rangesvd
