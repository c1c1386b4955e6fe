#pragma once

#include <stdexcept>
#include <string>

namespace keypose {

struct KeyposeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateConfiguration : KeyposeError { using KeyposeError::KeyposeError; };
struct DimensionMismatch : KeyposeError { using KeyposeError::KeyposeError; };
struct EmptyClass : KeyposeError { using KeyposeError::KeyposeError; };
struct ImageTooSmall : KeyposeError { using KeyposeError::KeyposeError; };
struct OutOfBounds : KeyposeError { using KeyposeError::KeyposeError; };
struct NoValidPlacement : KeyposeError { using KeyposeError::KeyposeError; };
struct InsufficientPairs : KeyposeError { using KeyposeError::KeyposeError; };
struct InsufficientActivations : KeyposeError { using KeyposeError::KeyposeError; };
struct InsufficientSamples : KeyposeError { using KeyposeError::KeyposeError; };
struct GroundTruthOutsideInterval : KeyposeError { using KeyposeError::KeyposeError; };
struct AnnotationNotCovered : KeyposeError { using KeyposeError::KeyposeError; };
struct NoCandidates : KeyposeError { using KeyposeError::KeyposeError; };
struct MisalignedSeries : KeyposeError { using KeyposeError::KeyposeError; };
struct InvalidSpec : KeyposeError { using KeyposeError::KeyposeError; };
struct IoError : KeyposeError { using KeyposeError::KeyposeError; };

} // namespace keypose
