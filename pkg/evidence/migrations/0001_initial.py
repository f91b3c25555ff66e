# Generated by hand for the evidence ledger; run makemigrations to regenerate if needed.
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="Acquisition",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("name", models.CharField(db_index=True, max_length=200)),
                ("session_id", models.CharField(blank=True, db_index=True, max_length=64)),
                ("peer", models.CharField(blank=True, max_length=100)),
                ("raw_dump_path", models.CharField(max_length=500)),
                ("metadata_path", models.CharField(max_length=500)),
                ("pages_received", models.PositiveBigIntegerField(default=0)),
                ("bytes_received", models.PositiveBigIntegerField(default=0)),
                ("digest", models.CharField(blank=True, max_length=64)),
                ("digest_verified", models.BooleanField(default=False)),
                ("atomicity_window_ns", models.BigIntegerField(default=0)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={"ordering": ["-created_at"]},
        ),
        migrations.CreateModel(
            name="DiffRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("label", models.CharField(blank=True, max_length=200)),
                ("output_dir", models.CharField(blank=True, max_length=500)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={"ordering": ["-created_at"]},
        ),
        migrations.CreateModel(
            name="TraceRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("scenario", models.CharField(db_index=True, max_length=100)),
                ("seed", models.BigIntegerField(default=0)),
                ("total", models.PositiveIntegerField()),
                ("counts", models.JSONField(default=dict)),
                ("segment_starts", models.JSONField(default=list)),
                ("log_path", models.CharField(blank=True, max_length=500)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={"ordering": ["-created_at"]},
        ),
        migrations.CreateModel(
            name="DiffPair",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("index", models.PositiveIntegerField()),
                ("dump_a", models.CharField(max_length=100)),
                ("dump_b", models.CharField(max_length=100)),
                ("pages_differing", models.PositiveBigIntegerField()),
                ("bytes_differing", models.PositiveBigIntegerField()),
                ("total_bytes", models.PositiveBigIntegerField()),
                ("proportion", models.FloatField()),
                ("pixmap_path", models.CharField(blank=True, max_length=500)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="pairs",
                        to="evidence.diffrun",
                    ),
                ),
            ],
            options={"ordering": ["run", "index"]},
        ),
        migrations.AddConstraint(
            model_name="diffpair",
            constraint=models.UniqueConstraint(fields=("run", "index"), name="uniq_diff_pair_per_run_index"),
        ),
    ]
