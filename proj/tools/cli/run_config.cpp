#include "run_config.hpp"

#include <fmt/format.h>
#include <toml.hpp>

#include "latefusion/detail/toml_reader.hpp"
#include "latefusion/kitti_io.hpp"

namespace latefusion::cli {

using detail::TomlReader;

RunConfig parse_run_config(std::string_view toml_text, const std::string &source)
{
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error &e) {
        throw InputError(fmt::format("{}: {}", source, e.description()));
    }

    RunConfig cfg;
    try {
        TomlReader r(root, "");
        r.read("seed", cfg.seed);
        r.read("threads", cfg.threads);
        r.read("class_name", cfg.class_name);

        if (auto *t = r.sub("match")) {
            TomlReader m(*t, "match");
            m.read("tau_match", cfg.match.tau_match);
            m.read("tau_match_openvocab", cfg.match.tau_match_openvocab);
            m.read("tau_gt", cfg.match.tau_gt);
            bool fallback = cfg.default_dims.has_value();
            int w = 1242, h = 375;
            m.read("default_dims", fallback);
            m.read("default_width", w);
            m.read("default_height", h);
            m.reject_unknown();
            cfg.default_dims.reset();
            if (fallback)
                cfg.default_dims = ImageDims(w, h);
        }
        if (auto *t = r.sub("train")) {
            TomlReader tr(*t, "train");
            tr.read("epochs", cfg.train.epochs);
            tr.read("lr", cfg.train.lr);
            tr.read("pos_weight", cfg.train.pos_weight);
            tr.read("neg_weight", cfg.train.neg_weight);
            tr.read("hidden", cfg.train.hidden);
            tr.read("batch_size", cfg.train.batch_size);
            tr.read("shuffle_each_epoch", cfg.train.shuffle_each_epoch);
            tr.reject_unknown();
        }
        if (auto *t = r.sub("filter")) {
            TomlReader f(*t, "filter");
            f.read("threshold", cfg.threshold);
            f.read("rescore", cfg.rescore);
            f.reject_unknown();
        }
        if (auto *t = r.sub("eval")) {
            TomlReader e(*t, "eval");
            std::string ap_mode(to_string(cfg.ap_mode));
            e.read("difficulty", cfg.difficulty);
            e.read("ap_mode", ap_mode);
            e.read("score_floor", cfg.score_floor);
            e.read("iou_threshold", cfg.eval.iou_threshold);
            e.read("dont_care_iou", cfg.eval.dont_care_iou);
            e.read("ignore_van", cfg.eval.ignore_van);
            e.reject_unknown();
            cfg.ap_mode = parse_ap_mode(ap_mode);
        }
        r.reject_unknown();
    } catch (const InputError &e) {
        throw InputError(fmt::format("{}: {}", source, e.what()));
    } catch (const std::invalid_argument &e) {
        throw InputError(fmt::format("{}: {}", source, e.what()));
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path)
{
    if (!std::filesystem::exists(path))
        throw InputError(fmt::format("config file not found: {}", path.string()));
    return parse_run_config(read_text_file(path), path.string());
}

} // namespace latefusion::cli
