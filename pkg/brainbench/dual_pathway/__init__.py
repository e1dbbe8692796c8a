from brainbench.dual_pathway.checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint
from brainbench.dual_pathway.encoder import BoldEncoder, EncoderSpec, encode_bold
from brainbench.dual_pathway.model import (
    DualPathwayModel,
    DualSpec,
    build_dual_model,
    dual_forward,
    lm_only_forward,
)
from brainbench.dual_pathway.phased import PHASE1_GRID, lm_freeze_hook, phased_train
