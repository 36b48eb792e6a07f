// Canvas <-> stage coordinate mapping.
//
// Stage units put the origin at the stage center with x rightward and
// y upward; canvas pixels put (0,0) at the top-left with y downward.
// The canvas is sized 1:1 with the stage, so the mapping is a pure
// translate-and-flip and round-trips exactly.

export interface StageSize {
  width: number;
  height: number;
}

export interface StagePoint {
  x: number;
  y: number;
}

export interface CanvasPoint {
  px: number;
  py: number;
}

/** Canvas pixel to stage units; null when the point is off the stage rect. */
export function canvasToStage(
  px: number,
  py: number,
  stage: StageSize,
): StagePoint | null {
  if (px < 0 || py < 0 || px > stage.width || py > stage.height) {
    return null;
  }
  return { x: px - stage.width / 2, y: stage.height / 2 - py };
}

export function stageToCanvas(x: number, y: number, stage: StageSize): CanvasPoint {
  return { px: stage.width / 2 + x, py: stage.height / 2 - y };
}
