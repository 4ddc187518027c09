//! Scene model, virtual array and FMCW data-cube synthesis.

pub mod array;
pub mod body;
pub mod config;
pub mod cube;
pub mod scene;
pub mod silhouette;
pub mod synth;

pub use array::{build_virtual_array, direction, ArrayGeometry};
pub use body::{BodyPose, Posture};
pub use config::{RadarConfig, SPEED_OF_LIGHT};
pub use cube::{DataCube, Frame, FrameRef};
pub use scene::{chest_displacement, BodyPart, Oscillation, Scatterer, SceneModel};
pub use silhouette::{render_silhouette, Silhouette};
pub use synth::{synthesize_capture, synthesize_frame, Noise, Synthesizer};
