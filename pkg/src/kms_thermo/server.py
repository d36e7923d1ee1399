"""KMS Thermodynamics MCP Server."""

import asyncio
import json
import logging
from typing import Any, Dict, List

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import Tool

from .tools.session import CircleCheck, OctafoldCheck, ThermoSession


# ロギング設定
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# サーバー初期化
server: Server = Server("kms-thermo")

# セッション初期化
session = ThermoSession()

_MODEL_ID = {"type": "string", "description": "model_load が返したモデルID"}
_DEPTH = {"type": "integer", "description": "シリンダーの語長（省略時はモデルの options.depth）", "minimum": 0}
_BETA = {"type": "number", "description": "逆温度 β（省略時は解いた値）"}
_TOL = {"type": "number", "description": "許容誤差（省略時はモデルの options.tol）"}

# MCPツール定義
TOOLS = [
    # モデル管理
    Tool(
        name="model_load",
        description="カタログ名またはJSONファイルのパスからモデルを読み込む",
        inputSchema={
            "type": "object",
            "properties": {
                "source": {
                    "type": "string",
                    "description": "カタログ名（例: o2_equal）またはモデルJSONのパス"
                }
            },
            "required": ["source"]
        }
    ),
    Tool(
        name="model_catalog",
        description="同梱モデルの一覧を取得する（export_dir 指定で正規JSONを書き出す）",
        inputSchema={
            "type": "object",
            "properties": {
                "export_dir": {
                    "type": "string",
                    "description": "書き出し先ディレクトリ（オプション）"
                }
            }
        }
    ),

    # 記号力学系
    Tool(
        name="dimension_solve",
        description="Hausdorff次元（KMS の逆温度 β）とPerron数を求める",
        inputSchema={
            "type": "object",
            "properties": {"model_id": _MODEL_ID},
            "required": ["model_id"]
        }
    ),
    Tool(
        name="measure_masses",
        description="シリンダー測度の質量表とKolmogorov整合性を計算する",
        inputSchema={
            "type": "object",
            "properties": {"model_id": _MODEL_ID, "depth": _DEPTH, "beta": _BETA},
            "required": ["model_id"]
        }
    ),
    Tool(
        name="quasi_invariance_table",
        description="全シリンダーで準不変性欠損を計算する（β ± 0.5 の対照つき）",
        inputSchema={
            "type": "object",
            "properties": {"model_id": _MODEL_ID, "depth": _DEPTH, "beta": _BETA, "tol": _TOL},
            "required": ["model_id"]
        }
    ),
    Tool(
        name="kms_check",
        description="双切断の全ペアで KMS 条件を検証する",
        inputSchema={
            "type": "object",
            "properties": {"model_id": _MODEL_ID, "depth": _DEPTH, "beta": _BETA, "tol": _TOL},
            "required": ["model_id"]
        }
    ),
    Tool(
        name="entropy_compute",
        description="位相エントロピー h(T) を計算する",
        inputSchema={
            "type": "object",
            "properties": {"model_id": _MODEL_ID},
            "required": ["model_id"]
        }
    ),
    Tool(
        name="metric_distance",
        description="最終的に周期的な2点の距離 ρ_f と局所スケーリング比を計算する",
        inputSchema={
            "type": "object",
            "properties": {
                "model_id": _MODEL_ID,
                "x": {"type": "string", "description": "点 '前周期(周期)'（例: 12(1)）"},
                "y": {"type": "string", "description": "点 '前周期(周期)'"}
            },
            "required": ["model_id", "x", "y"]
        }
    ),

    # 幾何的な例
    Tool(
        name="circle_check",
        description="円周の拡大被覆写像を検査する（局所スケーリング・準不変性・エントロピー）",
        inputSchema={
            "type": "object",
            "properties": {
                "check": {
                    "type": "string",
                    "description": "検査項目",
                    "enum": [c.value for c in CircleCheck]
                },
                "f": {"type": "string", "description": "重み f(t) の式（例: 2 + 0.5*sin(2*pi*t)）"},
                "model_id": _MODEL_ID,
                "sections": {"type": "integer", "description": "乱択区間数", "minimum": 1}
            },
            "required": ["check"]
        }
    ),
    Tool(
        name="octafold_check",
        description="Sierpinski オクタフォールドを検査する",
        inputSchema={
            "type": "object",
            "properties": {
                "check": {
                    "type": "string",
                    "description": "検査項目",
                    "enum": [c.value for c in OctafoldCheck]
                }
            },
            "required": ["check"]
        }
    ),
]


@server.list_tools()
async def list_tools() -> List[Tool]:
    """利用可能なツールのリストを返す."""
    logger.info(f"Listing {len(TOOLS)} available thermodynamics tools")
    return TOOLS


@server.call_tool()
async def call_tool(name: str, arguments: Dict[str, Any]) -> List[Dict[str, Any]]:
    """ツール呼び出しを処理する."""
    logger.info(f"Tool called: {name} with arguments: {arguments}")

    try:
        # モデル管理
        if name == "model_load":
            result = session.load_model(arguments["source"])
        elif name == "model_catalog":
            result = session.catalog(arguments.get("export_dir"))

        # 記号力学系
        elif name == "dimension_solve":
            result = session.dimension(arguments["model_id"])
        elif name == "measure_masses":
            result = session.measure(
                arguments["model_id"],
                arguments.get("depth"),
                arguments.get("beta")
            )
        elif name == "quasi_invariance_table":
            result = session.quasi_invariance(
                arguments["model_id"],
                arguments.get("depth"),
                arguments.get("beta"),
                arguments.get("tol")
            )
        elif name == "kms_check":
            result = session.kms_check(
                arguments["model_id"],
                arguments.get("beta"),
                arguments.get("depth"),
                arguments.get("tol")
            )
        elif name == "entropy_compute":
            result = session.entropy(arguments["model_id"])
        elif name == "metric_distance":
            result = session.metric(arguments["model_id"], arguments["x"], arguments["y"])

        # 幾何的な例
        elif name == "circle_check":
            result = session.circle_check(
                arguments["check"],
                model_id=arguments.get("model_id"),
                f=arguments.get("f"),
                sections=arguments.get("sections", 20)
            )
        elif name == "octafold_check":
            result = session.octafold_check(arguments["check"])

        else:
            result = {
                "success": False,
                "message": f"❌ 未知のツール: {name}"
            }

        logger.info(f"Tool {name} executed successfully")
        return [{"type": "text", "text": json.dumps(result, ensure_ascii=False, default=str)}]

    except Exception as e:
        error_message = f"❌ ツール実行エラー: {str(e)}"
        logger.error(f"Tool execution error: {e}")
        return [{"type": "text", "text": error_message}]


async def serve() -> None:
    """サーバーのメイン実行関数."""
    logger.info("Starting KMS Thermodynamics MCP Server...")

    try:
        async with stdio_server() as (read_stream, write_stream):
            logger.info("Server started successfully")
            await server.run(
                read_stream,
                write_stream,
                server.create_initialization_options()
            )
    except KeyboardInterrupt:
        logger.info("Server stopped by user")
    except Exception as e:
        logger.error(f"Server error: {e}")
        raise


def main() -> None:
    asyncio.run(serve())


if __name__ == "__main__":
    main()
