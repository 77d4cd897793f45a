//! Organize user-generated recordings into events with landmark audio
//! fingerprints, align each event's clips on a shared timeline, rank clips
//! per segment by relative quality, and filter false matches with a
//! supervised classifier.

pub mod audio_io;
pub mod fingerprint;
pub mod event_graph;
pub mod timeline;
pub mod match_classifier;
pub mod config;
pub mod persist;
pub mod pipeline;
pub mod report;
