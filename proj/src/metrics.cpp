#include "liir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace liir {

FrameJ region_similarity_j(const LabelImage& pred, const LabelImage& gt) {
    if (pred.height != gt.height || pred.width != gt.width) {
        throw ShapeError("region_similarity_j: size mismatch");
    }
    std::set<int> ids;
    for (int id : gt.ids)
        if (id > 0) ids.insert(id);
    FrameJ out;
    for (int id : ids) {
        std::size_t inter = 0, uni = 0;
        for (std::size_t i = 0; i < gt.ids.size(); ++i) {
            const bool in_gt = gt.ids[i] == id;
            const bool in_pred = pred.ids[i] == id;
            inter += in_gt && in_pred;
            uni += in_gt || in_pred;
        }
        out.object_ids.push_back(id);
        out.iou.push_back(uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni));
    }
    return out;
}

SequenceJ sequence_j(const std::vector<LabelImage>& pred,
                     const std::vector<LabelImage>& gt) {
    if (pred.size() != gt.size() || gt.empty()) {
        throw ShapeError("sequence_j: prediction/ground-truth length mismatch");
    }
    std::map<int, std::pair<double, int>> per_object;  // id -> (sum, count)
    double total = 0.0;
    int count = 0;
    // Frame 0 is the given annotation; score propagated frames only.
    for (std::size_t t = 1; t < gt.size(); ++t) {
        const FrameJ fj = region_similarity_j(pred[t], gt[t]);
        for (std::size_t k = 0; k < fj.object_ids.size(); ++k) {
            per_object[fj.object_ids[k]].first += fj.iou[k];
            per_object[fj.object_ids[k]].second += 1;
            total += fj.iou[k];
            ++count;
        }
    }
    SequenceJ out;
    out.mean = count == 0 ? 0.0 : total / count;
    if (!per_object.empty()) {
        const int max_id = per_object.rbegin()->first;
        out.per_object.assign(static_cast<std::size_t>(max_id), 0.0);
        for (const auto& [id, sc] : per_object)
            out.per_object[static_cast<std::size_t>(id - 1)] =
                sc.second == 0 ? 0.0 : sc.first / sc.second;
        out.objects = static_cast<int>(per_object.size());
    }
    return out;
}

double balanced_pixel_accuracy(const LabelImage& pred, const LabelImage& gt,
                               int num_classes) {
    if (pred.height != gt.height || pred.width != gt.width) {
        throw ShapeError("balanced_pixel_accuracy: size mismatch");
    }
    std::vector<std::size_t> correct(static_cast<std::size_t>(num_classes), 0);
    std::vector<std::size_t> total(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < gt.ids.size(); ++i) {
        const int id = gt.ids[i];
        if (id < 0 || id >= num_classes) {
            throw ContractError("balanced_pixel_accuracy: gt id out of range");
        }
        total[static_cast<std::size_t>(id)] += 1;
        correct[static_cast<std::size_t>(id)] += pred.ids[i] == id;
    }
    double acc = 0.0;
    int present = 0;
    for (int k = 0; k < num_classes; ++k) {
        if (total[static_cast<std::size_t>(k)] == 0) continue;
        acc += static_cast<double>(correct[static_cast<std::size_t>(k)]) /
               static_cast<double>(total[static_cast<std::size_t>(k)]);
        ++present;
    }
    return present == 0 ? 0.0 : acc / present;
}

double pck(const KeypointSet& pred, const KeypointSet& gt, double tau) {
    if (gt.points.empty()) return 0.0;
    const double radius = tau * std::max(gt.bbox_h, gt.bbox_w);
    std::map<int, const KeypointSet::Keypoint*> by_id;
    for (const auto& kp : pred.points) by_id[kp.joint_id] = &kp;
    int correct = 0;
    for (const auto& kp : gt.points) {
        auto it = by_id.find(kp.joint_id);
        if (it == by_id.end()) continue;  // missing joint counts incorrect
        const double dx = it->second->x - kp.x;
        const double dy = it->second->y - kp.y;
        if (std::sqrt(dx * dx + dy * dy) <= radius) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(gt.points.size());
}

}  // namespace liir
