#pragma once

#include <vector>

#include "liir/image.hpp"

namespace liir {

// Region similarity for one frame: per non-background object, intersection
// over union between prediction and ground truth. Objects absent from the
// ground truth are skipped.
struct FrameJ {
    std::vector<int> object_ids;
    std::vector<double> iou;
};

FrameJ region_similarity_j(const LabelImage& pred, const LabelImage& gt);

// Mean of per-(frame, object) IoU over frames 1..T-1 of a sequence.
struct SequenceJ {
    double mean = 0.0;
    std::vector<double> per_object;  // indexed by object id - 1
    int objects = 0;
};

SequenceJ sequence_j(const std::vector<LabelImage>& pred,
                     const std::vector<LabelImage>& gt);

// Mean per-class pixel recall over classes present in the ground truth.
// Balanced so the dominant background cannot carry the score.
double balanced_pixel_accuracy(const LabelImage& pred, const LabelImage& gt,
                               int num_classes);

// Keypoints at full frame resolution with the instance bounding box used for
// the PCK radius.
struct KeypointSet {
    struct Keypoint {
        int joint_id = 0;
        double x = 0.0, y = 0.0;
    };
    std::vector<Keypoint> points;
    double bbox_w = 0.0, bbox_h = 0.0;
};

// Fraction of ground-truth joints whose prediction lies within
// tau * max(bbox_h, bbox_w); joints missing from pred count as incorrect.
double pck(const KeypointSet& pred, const KeypointSet& gt, double tau);

}  // namespace liir
