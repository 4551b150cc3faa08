#include "mfs/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mfs::metrics {

namespace {

struct Counts {
    double tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts count(const BinaryMask& s, const BinaryMask& g) {
    if (s.h != g.h || s.w != g.w) throw std::invalid_argument("metrics: mask shape mismatch");
    Counts c;
    for (size_t i = 0; i < s.px.size(); ++i) {
        if (s.px[i] && g.px[i])
            c.tp += 1;
        else if (s.px[i] && !g.px[i])
            c.fp += 1;
        else if (!s.px[i] && g.px[i])
            c.fn += 1;
        else
            c.tn += 1;
    }
    return c;
}

}  // namespace

double dsc(const BinaryMask& s, const BinaryMask& g) {
    const Counts c = count(s, g);
    const double den = 2 * c.tp + c.fp + c.fn;  // |S| + |G|
    return den == 0.0 ? 1.0 : 2 * c.tp / den;
}

double iou(const BinaryMask& s, const BinaryMask& g) {
    const Counts c = count(s, g);
    const double den = c.tp + c.fp + c.fn;  // |S ∪ G|
    return den == 0.0 ? 1.0 : c.tp / den;
}

double fmeasure(const BinaryMask& s, const BinaryMask& g) {
    const Counts c = count(s, g);
    const double ns = c.tp + c.fp, ng = c.tp + c.fn;
    const double p = ns == 0.0 ? 0.0 : c.tp / ns;
    const double r = ng == 0.0 ? 0.0 : c.tp / ng;
    if (ns == 0.0 && ng == 0.0) return 1.0;  // both empty: perfect
    return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

double sensitivity(const BinaryMask& s, const BinaryMask& g) {
    const Counts c = count(s, g);
    const double ng = c.tp + c.fn;
    return ng == 0.0 ? 1.0 : c.tp / ng;
}

double specificity(const BinaryMask& s, const BinaryMask& g) {
    const Counts c = count(s, g);
    const double nb = c.tn + c.fp;  // |1−G|
    return nb == 0.0 ? 1.0 : c.tn / nb;
}

SampleScores score_pair(const std::string& id, const BinaryMask& s, const BinaryMask& g) {
    SampleScores r;
    r.id = id;
    r.dsc = dsc(s, g);
    r.iou = iou(s, g);
    r.fm = fmeasure(s, g);
    r.sen = sensitivity(s, g);
    r.spe = specificity(s, g);
    return r;
}

Summary aggregate(const std::vector<SampleScores>& scores) {
    Summary out;
    out.n = static_cast<int>(scores.size());
    if (scores.empty()) return out;
    for (const auto& s : scores) {
        const double v[5] = {s.dsc, s.iou, s.fm, s.sen, s.spe};
        for (int k = 0; k < 5; ++k) out.mean[k] += v[k];
    }
    for (int k = 0; k < 5; ++k) out.mean[k] /= out.n;
    if (out.n >= 2) {
        for (const auto& s : scores) {
            const double v[5] = {s.dsc, s.iou, s.fm, s.sen, s.spe};
            for (int k = 0; k < 5; ++k) {
                const double d = v[k] - out.mean[k];
                out.stdev[k] += d * d;
            }
        }
        for (int k = 0; k < 5; ++k) out.stdev[k] = std::sqrt(out.stdev[k] / (out.n - 1));
    }
    return out;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt_pm(double m, double s) { return fmt3(m) + "±" + fmt3(s); }

// Average row: mean and sample std across fold means.
void fold_stats(const std::vector<FoldResult>& folds, double mean[5], double sd[5]) {
    const int n = static_cast<int>(folds.size());
    for (int k = 0; k < 5; ++k) mean[k] = sd[k] = 0.0;
    if (n == 0) return;
    for (const auto& f : folds)
        for (int k = 0; k < 5; ++k) mean[k] += f.summary.mean[k];
    for (int k = 0; k < 5; ++k) mean[k] /= n;
    if (n >= 2) {
        for (const auto& f : folds)
            for (int k = 0; k < 5; ++k) {
                const double d = f.summary.mean[k] - mean[k];
                sd[k] += d * d;
            }
        for (int k = 0; k < 5; ++k) sd[k] = std::sqrt(sd[k] / (n - 1));
    }
}

}  // namespace

std::string fold_table_csv(const std::string& dataset, const std::vector<FoldResult>& folds) {
    std::ostringstream o;
    o << "Dataset,Fold,mDSC,mIoU,mFM,mSen,mSpe\n";
    for (const auto& f : folds) {
        o << dataset << ',' << f.fold;
        for (int k = 0; k < 5; ++k) o << ',' << fmt3(f.summary.mean[k]);
        o << '\n';
    }
    double m[5], s[5];
    fold_stats(folds, m, s);
    o << dataset << ",Average";
    for (int k = 0; k < 5; ++k) o << ',' << fmt_pm(m[k], s[k]);
    o << '\n';
    return o.str();
}

std::string fold_table_markdown(const std::string& dataset, const std::vector<FoldResult>& folds) {
    std::ostringstream o;
    o << "| Dataset | Fold | mDSC | mIoU | mFM | mSen | mSpe |\n";
    o << "|---|---|---|---|---|---|---|\n";
    for (const auto& f : folds) {
        o << "| " << dataset << " | " << f.fold << " |";
        for (int k = 0; k < 5; ++k) o << ' ' << fmt3(f.summary.mean[k]) << " |";
        o << '\n';
    }
    double m[5], s[5];
    fold_stats(folds, m, s);
    o << "| " << dataset << " | Average |";
    for (int k = 0; k < 5; ++k) o << ' ' << fmt_pm(m[k], s[k]) << " |";
    o << '\n';
    return o.str();
}

std::string per_image_csv(const std::vector<SampleScores>& scores) {
    std::ostringstream o;
    o << "id,dsc,iou,fm,sen,spe\n";
    char buf[64];
    for (const auto& s : scores) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f", s.dsc, s.iou, s.fm, s.sen,
                      s.spe);
        o << s.id << ',' << buf << '\n';
    }
    return o.str();
}

}  // namespace mfs::metrics
