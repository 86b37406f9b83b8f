use super::{
    connected_components, filter_pore_components, ExtractionParams, Polarity, PoreTemplate,
};
use crate::enhancement::{EnhancementParams, Enhancer, StftEnhancer};
use crate::error::Result;
use crate::imaging::{adaptive_threshold, morphology_open_close, GrayImage};

/// Enhancement, binarization, morphology, background components, filtering.
pub struct PoreExtractor {
    enhancer: Box<dyn Enhancer>,
    params: ExtractionParams,
}

impl PoreExtractor {
    pub fn new(enhancer: Box<dyn Enhancer>, params: ExtractionParams) -> Result<Self> {
        params.validate()?;
        Ok(PoreExtractor { enhancer, params })
    }

    pub fn stft(eparams: EnhancementParams, params: ExtractionParams) -> Result<Self> {
        eparams.validate()?;
        Self::new(Box::new(StftEnhancer::new(eparams)), params)
    }

    pub fn params(&self) -> &ExtractionParams {
        &self.params
    }

    pub fn extract(&self, img: &GrayImage, source_id: &str) -> Result<PoreTemplate> {
        let enhanced = self.enhancer.enhance(img)?;
        let binary = adaptive_threshold(
            &enhanced,
            self.params.window_fraction,
            self.params.confidence,
        )?;
        let binary = morphology_open_close(&binary, self.params.morphology_radius);
        let components = connected_components(&binary, Polarity::Background);
        let pores = filter_pore_components(&components, &binary, &self.params);
        Ok(PoreTemplate::new(source_id, img.ppi(), pores))
    }
}

/// One-shot STFT extraction with source id `image`.
pub fn extract_pores(
    img: &GrayImage,
    eparams: &EnhancementParams,
    xparams: &ExtractionParams,
) -> Result<PoreTemplate> {
    PoreExtractor::stft(eparams.clone(), xparams.clone())?.extract(img, "image")
}
