// Command-line front end: ingest CSV streams into compressed factor
// stores, answer range queries, verify reconstruction error, search for
// similar past windows and benchmark query scaling.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <rangesvd/commands.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Block-compressed SVD store for multivariate time series"};
    app.require_subcommand(1);

    rangesvd::IngestOptions ingest_opt;
    CLI::App* ingest = app.add_subcommand("ingest", "Compress a CSV stream into a factor store");
    ingest->add_option("--input", ingest_opt.input, "CSV file to ingest")->required();
    ingest->add_option("--store", ingest_opt.store, "Output store path")->required();
    ingest->add_option("--block-size", ingest_opt.block_size, "Rows per block");
    ingest->add_option("--xi", ingest_opt.xi, "Energy threshold in (0, 1]");
    ingest->add_flag("--drop-timestamp", ingest_opt.drop_timestamp,
                     "Discard the first column of every row");

    rangesvd::QueryOptions query_opt;
    double                 query_xi = -1.0;
    CLI::App* query = app.add_subcommand("query", "SVD of a stored time range");
    query->add_option("--store", query_opt.store, "Store path")->required();
    query->add_option("--start", query_opt.start, "First row (inclusive)")->required();
    query->add_option("--end", query_opt.end, "Last row (inclusive)")->required();
    query->add_option("--xi", query_xi, "Query-phase threshold (defaults to the store's)");
    query->add_option("--out", query_opt.out_prefix, "Prefix for U.csv, sigma.csv, V.csv")
        ->required();

    rangesvd::VerifyOptions verify_opt;
    double                  verify_xi = -1.0;
    CLI::App* verify = app.add_subcommand("verify", "Check a range answer against the raw CSV");
    verify->add_option("--store", verify_opt.store, "Store path")->required();
    verify->add_option("--input", verify_opt.input, "Raw CSV the store was built from")->required();
    verify->add_option("--start", verify_opt.start, "First row (inclusive)")->required();
    verify->add_option("--end", verify_opt.end, "Last row (inclusive)")->required();
    verify->add_option("--xi", verify_xi, "Query-phase threshold (defaults to the store's)");
    verify->add_flag("--drop-timestamp", verify_opt.drop_timestamp,
                     "Discard the first column of every row");

    rangesvd::SearchOptions search_opt;
    double                  search_xi = -1.0;
    CLI::App* search = app.add_subcommand("search", "Find past windows similar to a base range");
    search->add_option("--store", search_opt.store, "Store path")->required();
    search->add_option("--start", search_opt.start, "Base range first row")->required();
    search->add_option("--end", search_opt.end, "Base range last row")->required();
    search->add_option("--stride", search_opt.stride, "Window sliding period");
    search->add_option("--top", search_opt.top_n, "Number of hits to report");
    search->add_option("--xi", search_xi, "Query-phase threshold (defaults to the store's)");

    rangesvd::BenchOptions bench_opt;
    double                 bench_xi = -1.0;
    CLI::App* bench = app.add_subcommand("bench", "Median query time per range length");
    bench->add_option("--store", bench_opt.store, "Store path")->required();
    bench->add_option("--lengths", bench_opt.lengths, "Comma-separated query lengths")
        ->required()
        ->delimiter(',');
    bench->add_option("--reps", bench_opt.reps, "Repetitions per length");
    bench->add_option("--seed", bench_opt.seed, "Seed for random query offsets");
    bench->add_option("--xi", bench_xi, "Query-phase threshold (defaults to the store's)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (ingest->parsed()) {
        return rangesvd::cmd_ingest(ingest_opt, std::cout, std::cerr);
    }
    if (query->parsed()) {
        if (query->count("--xi") > 0) {
            query_opt.xi = query_xi;
        }
        return rangesvd::cmd_query(query_opt, std::cout, std::cerr);
    }
    if (verify->parsed()) {
        if (verify->count("--xi") > 0) {
            verify_opt.xi = verify_xi;
        }
        return rangesvd::cmd_verify(verify_opt, std::cout, std::cerr);
    }
    if (search->parsed()) {
        if (search->count("--xi") > 0) {
            search_opt.xi = search_xi;
        }
        return rangesvd::cmd_search(search_opt, std::cout, std::cerr);
    }
    if (bench->parsed()) {
        if (bench->count("--xi") > 0) {
            bench_opt.xi = bench_xi;
        }
        return rangesvd::cmd_bench(bench_opt, std::cout, std::cerr);
    }
    return 1;
}
