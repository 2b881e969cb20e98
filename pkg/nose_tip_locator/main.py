from .args import parse_args
from .commands import cmd_bench, cmd_detect, cmd_synth
from .config import PipelineConfig
from .core import Axis
from .ingest import DepthFileFormat


def pipeline_config(args) -> PipelineConfig:
    """Maps the detect flags onto a PipelineConfig."""
    return PipelineConfig(
        input_path=args.input,
        input_format=DepthFileFormat(args.format),
        pgm_scale=args.pgm_scale,
        smooth=not args.no_smooth,
        kernel_side=args.kernel_side,
        iterations=args.iterations,
        boundary=args.boundary,
        align_axis=None if args.align_axis is None else Axis(args.align_axis),
        sweep=args.sweep,
        out_landmark=args.out_landmark,
        out_smoothed=args.out_smoothed,
        out_cloud=args.out_cloud,
        out_mesh=args.out_mesh,
        mesh_iterations=args.mesh_iterations,
        dump_dir=args.dump_dir,
        truth_path=args.truth,
        tolerance_px=args.tolerance_px,
    )


def main(argv=None) -> int:
    args = parse_args(argv)

    if args.command == "detect":
        return cmd_detect(pipeline_config(args))
    if args.command == "synth":
        return cmd_synth(args)
    return cmd_bench(args)


if __name__ == "__main__":
    raise SystemExit(main())
