// Generates the procedural toy sign corpus as an image tree (and optionally
// directly as SNF) for demos and end-to-end runs.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "signet/error.hpp"
#include "signet/snf.hpp"
#include "signet/toycorpus.hpp"

int main(int argc, char** argv) {
    CLI::App app{"signet-toygen: render the procedural toy sign corpus"};
    std::string out_dir;
    std::string snf_out;
    int per_class = 100;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "Image tree output directory (<out>/<class_id>/sign_*.ppm|png)");
    app.add_option("--snf-out", snf_out, "Also write the corpus directly as one SNF file");
    app.add_option("--per-class", per_class, "Images per class")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Render seed");

    try {
        app.parse(argc, argv);
        if (out_dir.empty() && snf_out.empty())
            throw signet::Error::usage("toygen: provide --out and/or --snf-out");
        if (!out_dir.empty()) {
            signet::write_toy_corpus(out_dir, per_class, seed);
            std::cout << "toygen: wrote " << per_class << " images/class under " << out_dir << "\n";
        }
        if (!snf_out.empty()) {
            signet::save_snf(snf_out, signet::make_toy_dataset(per_class, seed));
            std::cout << "toygen: wrote " << snf_out << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const signet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == signet::Error::Kind::usage ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
