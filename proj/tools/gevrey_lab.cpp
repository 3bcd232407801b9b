// gevrey_lab: experiment front end.
//
//   gevrey_lab <experiment> [--config=file] [--key=value ...]
//
// Outputs go to $GEVREY_OUT/<experiment> unless out= is set. Exit status is
// 0 when every invariant flag passes, 1 when one fails, 2 on error.

#include <iostream>

#include "CLI11.hpp"

#include "gevrey/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Gevrey-regularity experiments"};
    app.require_subcommand(1);
    std::string config_file;
    for (auto id : gevrey::experiment_ids) {
        auto* sub = app.add_subcommand(std::string(id));
        sub->allow_extras();
        sub->add_option("--config", config_file, "flat key=value file");
        sub->footer("Any configuration key can be overridden with --key=value.");
    }
    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    gevrey::ExperimentConfig cfg;
    try {
        if (!config_file.empty()) gevrey::apply_config_file(cfg, config_file);
        gevrey::apply_overrides(cfg, sub->remaining());
        cfg.id = sub->get_name();
        cfg.validate();
    } catch (const gevrey::Error& e) {
        std::cerr << "{\"code\":\"" << gevrey::to_string(e.code()) << "\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    }
    const int status = gevrey::run_and_record(cfg);
    std::cout << gevrey::run_directory(cfg).string() << ": " << (status == 0 ? "PASS" : status == 1 ? "FAIL" : "ERROR")
              << '\n';
    return status;
}
